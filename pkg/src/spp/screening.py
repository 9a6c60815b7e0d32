"""Safe pattern pruning.

Given a primal/dual feasible pair, the dual optimum lies in a ball of
radius ``sqrt(2 * gap) / lam`` around the dual point.  A pattern whose
correlation with every dual vector in that ball stays below one has zero
optimal weight, and the sign-split bound ``u_t + r * sqrt(v_t)`` at a node
dominates that correlation for every descendant, so whole subtrees are
discarded at once.

Sums in the bounds use :func:`math.fsum` so that parent/child comparisons
are exact: a correctly rounded sum over a subset of nonnegative terms never
exceeds the correctly rounded sum over the superset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pattern_db import PatternDB
from .task import (Model, TaskSpec, dual_value, fit_intercept, margins, primal_value)
from .tree import TraverseStats, TreeNode, traverse

GAP_SLACK = 1e-9
RADICAND_SLACK = 1e-12


class ScreeningError(RuntimeError):
    pass


@dataclass
class NodeBounds:
    u: float
    v: float
    inner: float
    inner_beta: float


@dataclass
class GapCertificate:
    primal: float
    dual: float
    gap: float
    radius: float


@dataclass
class MaxInner:
    value: float
    pattern: tuple | None
    occ: np.ndarray | None
    stats: TraverseStats = field(default_factory=TraverseStats)


class _Columns:
    """Per-row vectors shared by every node evaluation for one dual point."""

    def __init__(self, task: TaskSpec, db: PatternDB, theta):
        theta = np.asarray(getattr(theta, "theta", theta), dtype=float)
        if theta.shape != (db.n,):
            raise ValueError(f"dual vector must have length {db.n}")
        a = task.row_sign(db)
        beta = task.beta(db)
        self.contrib = a * theta
        signed = beta * theta
        self.pos = np.where(signed > 0, self.contrib, 0.0)
        self.neg = np.where(signed < 0, self.contrib, 0.0)
        self.sq = a * a
        self.ab = a * beta
        self.beta_norm_sq = float(beta @ beta)

    def bounds(self, occ) -> NodeBounds:
        fsum = math.fsum
        pos = fsum(self.pos[occ].tolist())
        neg = -fsum(self.neg[occ].tolist())
        return NodeBounds(u=max(pos, neg), v=fsum(self.sq[occ].tolist()),
                          inner=fsum(self.contrib[occ].tolist()),
                          inner_beta=fsum(self.ab[occ].tolist()))

    def split_bound(self, occ) -> tuple:
        """(|inner|, sign-split bound) for the max search."""
        pos = math.fsum(self.pos[occ].tolist())
        neg = math.fsum(self.neg[occ].tolist())
        return abs(math.fsum(self.contrib[occ].tolist())), max(pos, -neg)


def node_bounds(node: TreeNode, task: TaskSpec, db: PatternDB, theta) -> NodeBounds:
    return _Columns(task, db, theta).bounds(node.occ)


def certificate(primal: float, dual: float, lam: float) -> GapCertificate:
    gap = primal - dual
    if gap < -GAP_SLACK:
        raise ScreeningError(
            f"infeasible dual point or broken primal evaluation: gap={gap:.3e}")
    gap = max(gap, 0.0)
    return GapCertificate(primal, dual, gap, math.sqrt(2.0 * gap) / lam)


def gap_certificate(task: TaskSpec, db: PatternDB, model: Model, theta,
                    lam: float, z=None) -> GapCertificate:
    if z is None:
        z = margins(task, db, model)
    return certificate(primal_value(task, db, model, lam, z=z),
                       dual_value(task, db, theta, lam), lam)


def ub(inner: float, v: float, inner_beta: float, cert, beta_norm_sq: float) -> float:
    """Largest ``|alpha . theta|`` over the gap ball cut by ``beta . theta = 0``."""
    radius = getattr(cert, "radius", cert)
    radicand = v - inner_beta * inner_beta / beta_norm_sq
    if radicand < -RADICAND_SLACK:
        raise ScreeningError(f"negative radicand {radicand:.3e} in UB")
    return abs(inner) + radius * math.sqrt(max(radicand, 0.0))


def sppc(bounds: NodeBounds, cert) -> float:
    radius = getattr(cert, "radius", cert)
    return bounds.u + radius * math.sqrt(bounds.v)


def dedup_by_occ(nodes) -> list:
    """One node per distinct occurrence list, keeping the smallest pattern."""
    best = {}
    for node in nodes:
        key = node.occ_key
        cur = best.get(key)
        if cur is None or node.pattern < cur.pattern:
            best[key] = node
    return sorted(best.values(), key=lambda nd: nd.pattern)


def screen_with_radius(db: PatternDB, task: TaskSpec, maxpat: int, theta,
                       radius: float, threads: int = 1):
    cols = _Columns(task, db, theta)
    bns = cols.beta_norm_sq

    def visitor(node):
        b = cols.bounds(node.occ)
        if b.u + radius * math.sqrt(b.v) < 1.0:
            return False, True
        return ub(b.inner, b.v, b.inner_beta, radius, bns) >= 1.0, False

    kept, stats = traverse(db, maxpat, visitor, threads=threads)
    return dedup_by_occ(kept), stats


def safe_screen(db: PatternDB, task: TaskSpec, maxpat: int, model: Model, theta,
                lam: float, threads: int = 1, z=None):
    """Traverse the tree once and return the safe superset of active patterns.

    ``theta`` must be dual feasible.  Returns ``(kept_nodes, stats, cert)``.
    """
    cert = gap_certificate(task, db, model, theta, lam, z=z)
    kept, stats = screen_with_radius(db, task, maxpat, theta, cert.radius, threads)
    return kept, stats, cert


def max_abs_inner(db: PatternDB, task: TaskSpec, maxpat: int, theta,
                  exclude=None) -> MaxInner:
    """Exact ``max_t |alpha_t . theta|`` by branch and bound over the tree.

    Subtrees whose sign-split bound cannot beat the incumbent are skipped.
    Ties keep the first pattern in traversal order.  Patterns whose
    occurrence key is in ``exclude`` are visited but never selected.
    """
    cols = _Columns(task, db, theta)
    best = MaxInner(-1.0, None, None)

    def visitor(node):
        val, bound = cols.split_bound(node.occ)
        if val > best.value and not (exclude and node.occ_key in exclude):
            best.value, best.pattern, best.occ = val, node.pattern, node.occ
        return False, bound <= best.value

    _, stats = traverse(db, maxpat, visitor)
    best.stats = stats
    best.value = max(best.value, 0.0)
    return best


def default_maxpat(db: PatternDB) -> int:
    return max(1, max((len(r) for r in db.transactions), default=1))


def lambda_max_point(db: PatternDB, task: TaskSpec, maxpat=None):
    """Start of the path: ``(max search result, intercept b0)``.

    ``b0`` minimizes the loss with ``w = 0``; the returned value is
    ``max_t |alpha_t . (-f'(z0))|`` so the zero weight vector is optimal for
    every ``lam`` at or above it.
    """
    if maxpat is None:
        maxpat = default_maxpat(db)
    s = np.zeros(db.n)
    b0 = fit_intercept(task, db, s)
    z = s + b0 - db.responses if not task.is_classification else db.responses * b0
    res = max_abs_inner(db, task, maxpat, -task.dloss(z))
    return res, b0


def lambda_max(db: PatternDB, task: TaskSpec, maxpat=None) -> float:
    if np.unique(db.responses).size < 2:
        raise ScreeningError("lambda_max = 0; path undefined (constant response)")
    res, _ = lambda_max_point(db, task, maxpat)
    if not res.value > 0.0:
        raise ScreeningError("lambda_max = 0; path undefined")
    return res.value
