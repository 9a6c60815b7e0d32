"""Cyclic coordinate descent on a working set of pattern columns.

Each epoch sweeps the columns in order, refits the intercept exactly, and
then checks the duality gap of the restricted problem.  The dual point is
``-f'(z) / lam`` scaled so that every working-set constraint holds, which is
sufficient for the restricted problem.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .pattern_db import PatternDB
from .screening import certificate
from .task import STATIONARITY_TOL, DualPoint, Model, TaskSpec

log = logging.getLogger(__name__)

ZERO_WEIGHT = 1e-12
REFRESH_EVERY = 50
DEFAULT_MAX_EPOCHS = 100_000


@dataclass
class SolveReport:
    iterations: int
    final_gap: float
    converged: bool


class WorkingSet:
    """Pattern columns stored as concatenated occurrence lists (CSC-like)."""

    def __init__(self, patterns, occs):
        self.patterns = [tuple(p) for p in patterns]
        self.occs = [np.asarray(o, dtype=np.int64) for o in occs]
        if len(self.patterns) != len(self.occs):
            raise ValueError("patterns and occurrence lists differ in length")
        keys = [o.tobytes() for o in self.occs]
        if len(set(keys)) != len(keys):
            raise ValueError("working set columns must have distinct occurrence lists")
        if any(o.size == 0 for o in self.occs):
            raise ValueError("working set columns must have nonempty support")
        sizes = np.array([o.size for o in self.occs], dtype=np.int64)
        self.ptr = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
        self.idx = (np.concatenate(self.occs) if self.occs
                    else np.empty(0, dtype=np.int64))
        self.column_norms = sizes.astype(float)
        self.index = {p: j for j, p in enumerate(self.patterns)}
        self.by_occ = dict(zip(keys, range(len(keys))))

    @classmethod
    def from_nodes(cls, nodes):
        return cls([nd.pattern for nd in nodes], [nd.occ for nd in nodes])

    @classmethod
    def from_patterns(cls, db: PatternDB, patterns):
        """Columns for explicit patterns; occurrence duplicates keep the first."""
        pats, occs, seen = [], [], set()
        for p in patterns:
            occ = db.support(p)
            key = occ.tobytes()
            if occ.size == 0 or key in seen:
                continue
            seen.add(key)
            pats.append(tuple(p))
            occs.append(occ)
        return cls(pats, occs)

    def __len__(self):
        return len(self.patterns)

    def supports(self) -> dict:
        return dict(zip(self.patterns, self.occs))

    def column_inner(self, v) -> np.ndarray:
        """``sum_{i in occ_j} v_i`` for every column ``j``."""
        if not self.patterns:
            return np.empty(0)
        return np.add.reduceat(np.asarray(v)[self.idx], self.ptr[:-1])


def soft_threshold(c: float, t: float) -> float:
    """``argmin_w 0.5 * (w - c)**2 + t * |w|``."""
    if c > t:
        return c - t
    if c < -t:
        return c + t
    return 0.0


def restricted_dual(task: TaskSpec, db: PatternDB, ws: WorkingSet, z, lam) -> DualPoint:
    raw = -task.dloss(z) / lam
    a = task.row_sign(db)
    inner = ws.column_inner(a * raw)
    cmax = float(np.max(np.abs(inner))) if inner.size else 0.0
    scale = max(1.0, cmax)
    return DualPoint(raw / scale, scale, cmax)


def kkt_violation(db: PatternDB, task: TaskSpec, ws: WorkingSet, model: Model,
                  theta) -> float:
    """Worst violation of the optimality conditions over working-set columns."""
    theta = getattr(theta, "theta", theta)
    inner = ws.column_inner(task.row_sign(db) * theta)
    worst = 0.0
    for j, p in enumerate(ws.patterns):
        w = model.weights.get(p, 0.0)
        if w == 0.0:
            v = max(0.0, abs(inner[j]) - 1.0)
        else:
            v = abs(inner[j] - np.sign(w))
        worst = max(worst, v)
    return float(worst)


def solve(db: PatternDB, task: TaskSpec, ws: WorkingSet, lam: float,
          init: Model | None = None, tol: float = 1e-6,
          max_epochs: int = DEFAULT_MAX_EPOCHS, trace: list | None = None):
    """Minimize the L1 problem restricted to the working set.

    Returns ``(model, dual_point, report)``.  Hitting ``max_epochs`` is not
    an error: the report says ``converged=False`` and the last iterate is
    returned.  ``trace`` collects the primal value after every epoch.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    w = np.zeros(len(ws))
    b = 0.0
    if init is not None:
        b = float(init.intercept)
        dropped = []
        for p, v in init.weights.items():
            j = ws.index.get(tuple(p))
            if j is None:
                if v != 0.0:
                    dropped.append(p)
            else:
                w[j] = v
        if dropped:
            log.warning("dropping %d initial weights outside the working set",
                        len(dropped))
    y = np.ascontiguousarray(db.responses, dtype=float)
    clf = task.is_classification
    theta = np.empty(db.n)
    buf = np.empty(max_epochs + 1 if trace is not None else 0)
    b, epochs, primal, dual, cmax = _kernels.cd_solve(
        ws.idx, ws.ptr, ws.column_norms, w, b, y, clf, float(lam), float(tol),
        int(max_epochs), REFRESH_EVERY, STATIONARITY_TOL, theta, buf)
    if trace is not None:
        trace.extend(buf[:epochs + 1].tolist())

    tiny = (w != 0.0) & (np.abs(w) < ZERO_WEIGHT)
    if tiny.any():
        w[tiny] = 0.0
        s = _kernels.linear(ws.idx, ws.ptr, w, db.n)
        b = _kernels.intercept(y, s, b, clf, STATIONARITY_TOL)
        primal, dual, cmax = _kernels.restricted_gap(ws.idx, ws.ptr, w, s, b, y, clf,
                                                     float(lam), theta)
    cert = certificate(primal, dual, lam)

    model = Model({p: float(w[j]) for j, p in enumerate(ws.patterns) if w[j] != 0.0},
                  float(b), float(lam))
    report = SolveReport(int(epochs), cert.gap, cert.gap <= tol)
    return model, DualPoint(theta, max(1.0, cmax), cmax), report
