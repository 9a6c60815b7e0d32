"""Compiled inner loops for the coordinate-descent solver.

Columns are concatenated occurrence lists: column ``j`` covers
``idx[ptr[j]:ptr[j + 1]]``.  ``s`` holds the unsigned linear part ``X w``;
margins are ``s + b - y`` (regression) or ``y * (s + b)`` (classification).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def linear(idx, ptr, w, n):
    s = np.zeros(n)
    for j in range(w.shape[0]):
        if w[j] != 0.0:
            for k in range(ptr[j], ptr[j + 1]):
                s[idx[k]] += w[j]
    return s


@njit(cache=True)
def _hinge_grad(y, s, b):
    g = 0.0
    c = 0.0
    for i in range(y.shape[0]):
        h = 1.0 - y[i] * (s[i] + b)
        if h > 0.0:
            g -= y[i] * h
            c += 1.0
    return g, c


@njit(cache=True)
def intercept_clf(y, s, b0, tol):
    """Stationary intercept of the squared hinge, Newton inside a bracket."""
    lo = np.inf
    hi = -np.inf
    for i in range(y.shape[0]):
        # below lo every negative row is inactive; above hi every positive row is
        if y[i] < 0:
            lo = min(lo, -1.0 - s[i])
            hi = max(hi, -1.0 - s[i])
        else:
            lo = min(lo, 1.0 - s[i])
            hi = max(hi, 1.0 - s[i])
    b = min(max(b0, lo), hi)
    for _ in range(400):
        g, c = _hinge_grad(y, s, b)
        if abs(g) <= tol:
            return b
        if g < 0.0:
            lo = b
        else:
            hi = b
        nb = b - g / c if c > 0.0 else 0.5 * (lo + hi)
        if not (lo < nb < hi):
            nb = 0.5 * (lo + hi)
        if nb == b:
            return b
        b = nb
    return b


@njit(cache=True)
def intercept(y, s, b0, clf, tol):
    if clf:
        return intercept_clf(y, s, b0, tol)
    acc = 0.0
    for i in range(y.shape[0]):
        acc += y[i] - s[i]
    return acc / y.shape[0]


@njit(cache=True)
def epoch(idx, ptr, norms, w, s, b, y, clf, lam):
    for j in range(w.shape[0]):
        start, end = ptr[j], ptr[j + 1]
        g = 0.0
        if clf:
            for k in range(start, end):
                i = idx[k]
                h = 1.0 - y[i] * (s[i] + b)
                if h > 0.0:
                    g -= y[i] * h
        else:
            for k in range(start, end):
                i = idx[k]
                g += s[i] + b - y[i]
        step = 1.0 / norms[j]
        c = w[j] - g * step
        t = lam * step
        if c > t:
            new = c - t
        elif c < -t:
            new = c + t
        else:
            new = 0.0
        d = new - w[j]
        if d != 0.0:
            w[j] = new
            for k in range(start, end):
                s[idx[k]] += d


@njit(cache=True)
def restricted_gap(idx, ptr, w, s, b, y, clf, lam, theta):
    """Fill ``theta`` with the scaled dual point; return (primal, dual, cmax)."""
    n = y.shape[0]
    loss = 0.0
    for i in range(n):
        if clf:
            h = 1.0 - y[i] * (s[i] + b)
            if h < 0.0:
                h = 0.0
            loss += 0.5 * h * h
            theta[i] = h / lam
        else:
            z = s[i] + b - y[i]
            loss += 0.5 * z * z
            theta[i] = -z / lam
    cmax = 0.0
    for j in range(ptr.shape[0] - 1):
        acc = 0.0
        for k in range(ptr[j], ptr[j + 1]):
            i = idx[k]
            acc += y[i] * theta[i] if clf else theta[i]
        cmax = max(cmax, abs(acc))
    scale = max(1.0, cmax)
    l1 = 0.0
    for j in range(w.shape[0]):
        l1 += abs(w[j])
    sq = 0.0
    lin = 0.0
    for i in range(n):
        theta[i] /= scale
        sq += theta[i] * theta[i]
        lin += theta[i] if clf else y[i] * theta[i]
    return loss + lam * l1, -0.5 * lam * lam * sq + lam * lin, cmax


@njit(cache=True)
def cd_solve(idx, ptr, norms, w, b, y, clf, lam, tol, max_epochs, refresh,
             stat_tol, theta, trace):
    """Epochs until the restricted gap is at most ``tol``.

    Returns ``(b, epochs, primal, dual, cmax)``; ``w`` and ``theta`` are
    updated in place.  ``trace`` receives primal values while it has room.
    """
    n = y.shape[0]
    s = linear(idx, ptr, w, n)
    b = intercept(y, s, b, clf, stat_tol)
    primal, dual, cmax = restricted_gap(idx, ptr, w, s, b, y, clf, lam, theta)
    if trace.shape[0] > 0:
        trace[0] = primal
    epochs = 0
    while primal - dual > tol and epochs < max_epochs:
        epoch(idx, ptr, norms, w, s, b, y, clf, lam)
        epochs += 1
        if epochs % refresh == 0:
            s = linear(idx, ptr, w, n)
        b = intercept(y, s, b, clf, stat_tol)
        primal, dual, cmax = restricted_gap(idx, ptr, w, s, b, y, clf, lam, theta)
        if epochs < trace.shape[0]:
            trace[epochs] = primal
    return b, epochs, primal, dual, cmax
