"""Brute-force reference machinery for verification.

Nothing here reuses the tree traversal or the coordinate-descent solver:
patterns are enumerated by expanding every transaction's subsets, the full
problem is solved densely by accelerated proximal gradient, and ball
maximization is done both at the analytic maximizer and by projected
gradient ascent.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .pattern_db import PatternDB
from .task import Model, TaskSpec

DEFAULT_CAP = 5000


class OracleCapError(ValueError):
    pass


@dataclass
class DenseProblem:
    task: TaskSpec
    alpha: np.ndarray          # (n, D)
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    patterns: list
    occs: list

    @property
    def n_patterns(self) -> int:
        return len(self.patterns)


def enumerate_patterns(db: PatternDB, maxpat: int, cap: int = DEFAULT_CAP) -> dict:
    """pattern -> sorted list of rows, for every supported pattern of size <= maxpat."""
    found = {}
    for i, row in enumerate(db.transactions):
        for k in range(1, min(maxpat, len(row)) + 1):
            for sub in combinations(row, k):
                rows = found.get(sub)
                if rows is None:
                    found[sub] = [i]
                    if len(found) > cap:
                        raise OracleCapError(
                            f"more than {cap} patterns up to size {maxpat}; "
                            f"reduce maxpat or the number of items")
                else:
                    rows.append(i)
    return found


def enumerate_all(db: PatternDB, task: TaskSpec, maxpat: int,
                  cap: int = DEFAULT_CAP) -> DenseProblem:
    found = enumerate_patterns(db, maxpat, cap)
    patterns = sorted(found)
    y = db.responses
    alpha = np.zeros((db.n, len(patterns)))
    for j, p in enumerate(patterns):
        alpha[found[p], j] = 1.0
    if task.is_classification:
        alpha *= y[:, None]
        beta, gamma, delta = y.copy(), np.zeros(db.n), np.ones(db.n)
    else:
        beta, gamma, delta = np.ones(db.n), -y.copy(), y.copy()
    occs = [np.array(found[p], dtype=np.int64) for p in patterns]
    return DenseProblem(task, alpha, beta, gamma, delta, patterns, occs)


# ---------------------------------------------------------------------------
# dense solver

def _loss(task, z):
    if task.is_classification:
        h = np.maximum(0.0, 1.0 - z)
        return 0.5 * h * h
    return 0.5 * z * z


def _dloss(task, z):
    return -np.maximum(0.0, 1.0 - z) if task.is_classification else z


def exact_intercept(p: DenseProblem, lin) -> float:
    """Minimizer over b of sum_i f(lin_i + beta_i b + gamma_i).

    Classification: the derivative ``g(b)`` is piecewise linear and
    nondecreasing with kinks at ``c_i = y_i - x_i . w``.  It is evaluated at
    every kink with prefix sums and the root is solved on the bracketing
    linear piece.
    """
    if not p.task.is_classification:
        return float(np.mean(-p.gamma - lin))
    y = p.beta
    c = y - lin * y
    cp = np.sort(c[y > 0])       # active while b < c_i
    cn = np.sort(c[y < 0])       # active while b > c_i
    pp = np.concatenate(([0.0], np.cumsum(cp)))
    pn = np.concatenate(([0.0], np.cumsum(cn)))

    def pieces(b):
        ip = np.searchsorted(cp, b, side="right")
        ineg = np.searchsorted(cn, b, side="left")
        count = (cp.size - ip) + ineg
        total = (pp[-1] - pp[ip]) + pn[ineg]
        return count, total

    knots = np.sort(c)
    count, total = pieces(knots)
    g = count * knots - total
    zero = np.flatnonzero(g == 0.0)
    if zero.size:
        return float(knots[zero[0]])
    k = int(np.searchsorted(g, 0.0))
    if k == 0 or k == knots.size:
        raise ArithmeticError("intercept bracket failed")
    a, b = knots[k - 1], knots[k]
    m, tot = pieces(0.5 * (a + b))
    if m == 0:
        return float(0.5 * (a + b))
    return float(np.clip(tot / m, a, b))


def dense_gap(p: DenseProblem, w, lam):
    """(gap, primal, dual, intercept) with the intercept refit exactly."""
    lin = p.alpha @ w
    b = exact_intercept(p, lin)
    z = lin + p.beta * b + p.gamma
    primal = float(np.sum(_loss(p.task, z)) + lam * np.sum(np.abs(w)))
    raw = -_dloss(p.task, z) / lam
    cmax = float(np.max(np.abs(p.alpha.T @ raw))) if p.n_patterns else 0.0
    theta = raw / max(1.0, cmax)
    dual = float(-0.5 * lam * lam * (theta @ theta) + lam * (p.delta @ theta))
    return primal - dual, primal, dual, b


def _soft(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _residual(task, z):
    """``q`` with ``f(z) = q(z)**2 / 2``."""
    return np.maximum(0.0, 1.0 - z) if task.is_classification else z


def solve_dense(p: DenseProblem, lam: float, tol: float = 1e-9,
                init=None, max_iter: int = 200_000, check_every: int = 10):
    """FISTA with backtracking and restarts on the intercept-profiled objective.

    Loss decreases in the line search are computed from residual differences
    so that the test stays meaningful once the objective has converged to
    machine precision; the step never drops below ``1 / ||A||^2``.

    Returns ``(w, b, gap)``.  Raises ``ArithmeticError`` at the iteration cap.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    D = p.n_patterns
    w = np.zeros(D) if init is None else np.array(init, dtype=float)
    if D == 0:
        gap, _, _, b = dense_gap(p, w, lam)
        return w, b, gap

    def residual(v):
        lin = p.alpha @ v
        b = exact_intercept(p, lin)
        return _residual(p.task, lin + p.beta * b + p.gamma)

    def grad(q):
        # f'(z) = q for regression and -q for the squared hinge
        return p.alpha.T @ (-q if p.task.is_classification else q)

    L_max = float(np.linalg.norm(p.alpha, 2)) ** 2
    L = L_max / 4
    x_prev = w.copy()
    yk = w.copy()
    t = 1.0
    for it in range(1, max_iter + 1):
        qy = residual(yk)
        gy = grad(qy)
        while True:
            x = _soft(yk - gy / L, lam / L)
            d = x - yk
            qx = residual(x)
            decrease = 0.5 * float(np.sum((qx - qy) * (qx + qy)))
            if L >= L_max or decrease <= gy @ d + 0.5 * L * (d @ d):
                break
            L = min(2.0 * L, L_max)
        if (yk - x) @ (x - x_prev) > 0:
            t, yk = 1.0, x.copy()
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            yk = x + ((t - 1.0) / t_next) * (x - x_prev)
            t = t_next
        x_prev = x
        L *= 0.95
        if it % check_every == 0:
            gap, _, _, b = dense_gap(p, x, lam)
            if gap <= tol:
                return x, b, gap
    raise ArithmeticError(f"dense solver hit {max_iter} iterations")


def dense_model(p: DenseProblem, w, b, lam) -> Model:
    return Model({pat: float(v) for pat, v in zip(p.patterns, w) if v != 0.0},
                 float(b), float(lam))


def dense_lambda_max(p: DenseProblem) -> float:
    lin = np.zeros(p.alpha.shape[0])
    b = exact_intercept(p, lin)
    z = p.beta * b + p.gamma
    if p.n_patterns == 0:
        return 0.0
    return float(np.max(np.abs(p.alpha.T @ _dloss(p.task, z))))


# ---------------------------------------------------------------------------
# ball maximization

def _project(theta, center, beta, r):
    """Project onto {beta . x = 0} intersected with the ball B(center, r)."""
    bb = beta @ beta
    x = theta - (beta @ theta) / bb * beta
    c = center - (beta @ center) / bb * beta
    rr = r * r - float(np.sum((center - c) ** 2))
    rad = np.sqrt(max(rr, 0.0))
    d = x - c
    nd = float(np.linalg.norm(d))
    if nd > rad:
        x = c + d * (rad / nd)
    return x


def ball_argmax(alpha, beta, theta_tilde, r, method: str = "both",
                iters: int = 500, seed: int = 0) -> float:
    """max |alpha . theta| s.t. ||theta - theta_tilde|| <= r, beta . theta = 0.

    ``method`` is ``"point"`` (evaluate the analytic maximizer and its
    mirror), ``"pg"`` (projected gradient ascent on both signs of the objective) or
    ``"both"``.  ``theta_tilde`` is assumed to satisfy ``beta . theta = 0``.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    tt = np.asarray(theta_tilde, dtype=float)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if not np.any(beta):
        raise ValueError("beta must be nonzero")
    base = abs(float(alpha @ tt))
    if r == 0:
        return base
    ab = float(alpha @ beta)
    bb = float(beta @ beta)
    det = float(alpha @ alpha) * bb - ab * ab
    if det <= 1e-14 * max(1.0, float(alpha @ alpha) * bb):
        return base
    best = -np.inf
    if method in ("point", "both"):
        step = np.sqrt(bb) * r / np.sqrt(det)
        direction = alpha - ab / bb * beta
        for sign in (-1.0, 1.0):
            th = tt + sign * step * direction
            best = max(best, abs(float(alpha @ th)))
    if method in ("pg", "both"):
        # |alpha . theta| has one local maximum per sign; each signed problem
        # is linear over a convex set, so ascend both from random starts
        rng = np.random.default_rng(seed)
        lr = r / np.linalg.norm(alpha)
        for sign in (1.0, -1.0):
            for _ in range(2):
                th = _project(tt + r * rng.standard_normal(tt.shape) / np.sqrt(tt.size),
                              tt, beta, r)
                for _ in range(iters):
                    th = _project(th + lr * sign * alpha, tt, beta, r)
                best = max(best, abs(float(alpha @ th)))
    if best == -np.inf:
        raise ValueError(f"unknown method {method!r}")
    return best


# ---------------------------------------------------------------------------
# random instances

def random_transactions(rng, n: int, d: int, max_items: int = 5) -> list:
    rows = []
    for _ in range(n):
        k = int(rng.integers(1, min(max_items, d) + 1))
        rows.append(sorted(int(t) for t in rng.choice(d, size=k, replace=False)))
    return rows


def random_responses(rng, n: int, task: str) -> np.ndarray:
    while True:
        if task == "classification":
            y = rng.choice([-1.0, 1.0], size=n)
        else:
            y = rng.standard_normal(n)
        if np.unique(y).size > 1:
            return y


def synth_db(n: int, d: int, task: str, seed: int) -> PatternDB:
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if task == "classification" and n < 2:
        raise ValueError("classification needs at least two rows")
    rng = np.random.default_rng(seed)
    rows = random_transactions(rng, n, d)
    y = random_responses(rng, n, task)
    return PatternDB.from_rows(rows, y, task=task, num_items=d,
                               item_names={t: t for t in range(d)})


def random_instance(seed: int, task: str) -> PatternDB:
    """Desk-scale instance: d in 6..12, n in 10..30, 1..5 items per row."""
    rng = np.random.default_rng([seed, 0 if task == "regression" else 1])
    d = int(rng.integers(6, 13))
    n = int(rng.integers(10, 31))
    rows = random_transactions(rng, n, d)
    y = random_responses(rng, n, task)
    return PatternDB.from_rows(rows, y, task=task)
