"""Loss instantiations of the unified L1 problem.

Every row ``i`` contributes ``f(alpha_i . w + beta_i * b + gamma_i)``.  For
item-set features ``alpha_it = a_i * x_it`` where ``a_i`` is 1 for
regression and ``y_i`` for classification, so a pattern column is fully
described by its occurrence list and the per-row sign vector ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import intercept
from .pattern_db import PatternDB, normalize_task

STATIONARITY_TOL = 1e-10


@dataclass
class Model:
    """Sparse linear model over patterns.

    ``weights`` maps pattern tuples to nonzero reals; missing patterns have
    weight zero.
    """

    weights: dict = field(default_factory=dict)
    intercept: float = 0.0
    lam: float = float("nan")

    @property
    def l1_norm(self) -> float:
        return float(sum(abs(v) for v in self.weights.values()))

    def active(self) -> list:
        return sorted(p for p, v in self.weights.items() if v != 0.0)


@dataclass
class DualPoint:
    """Dual vector with the data certifying its feasibility.

    ``theta = raw / scale`` where ``scale = max(1, constraint_max)``.
    """

    theta: np.ndarray
    scale: float = 1.0
    constraint_max: float = 0.0


@dataclass(frozen=True)
class TaskSpec:
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_task(self.kind))

    @property
    def is_classification(self) -> bool:
        return self.kind == "classification"

    # scalar-vectorized loss and derivative
    def loss(self, z):
        z = np.asarray(z, dtype=float)
        if self.is_classification:
            return 0.5 * np.maximum(0.0, 1.0 - z) ** 2
        return 0.5 * z * z

    def dloss(self, z):
        z = np.asarray(z, dtype=float)
        if self.is_classification:
            return -np.maximum(0.0, 1.0 - z)
        return z

    # per-row constants
    def row_sign(self, db: PatternDB) -> np.ndarray:
        """``a`` with ``alpha_it = a_i * x_it``."""
        return db.responses.copy() if self.is_classification else np.ones(db.n)

    def beta(self, db: PatternDB) -> np.ndarray:
        return db.responses.copy() if self.is_classification else np.ones(db.n)

    def gamma(self, db: PatternDB) -> np.ndarray:
        return np.zeros(db.n) if self.is_classification else -db.responses

    def delta(self, db: PatternDB) -> np.ndarray:
        return np.ones(db.n) if self.is_classification else db.responses.copy()

    @property
    def epsilon(self) -> float:
        return 0.0 if self.is_classification else -np.inf


REGRESSION = TaskSpec("regression")
CLASSIFICATION = TaskSpec("classification")


def task_for(db: PatternDB) -> TaskSpec:
    return TaskSpec(db.task)


def alpha_entry(task: TaskSpec, db: PatternDB, pattern, i: int) -> float:
    from .pattern_db import occurs

    if not occurs(db, pattern, i):
        return 0.0
    return float(db.responses[i]) if task.is_classification else 1.0


def linear_part(db: PatternDB, model: Model, supports=None) -> np.ndarray:
    """``s = X w`` (unsigned).  ``supports`` may cache pattern -> rows."""
    s = np.zeros(db.n)
    for pattern, w in model.weights.items():
        if w == 0.0:
            continue
        rows = supports[pattern] if supports is not None else db.support(pattern)
        s[rows] += w
    return s


def margins_from_linear(task: TaskSpec, db: PatternDB, s, b) -> np.ndarray:
    if task.is_classification:
        return db.responses * (s + b)
    return s + b - db.responses


def margins(task: TaskSpec, db: PatternDB, model: Model, supports=None) -> np.ndarray:
    return margins_from_linear(task, db, linear_part(db, model, supports),
                               model.intercept)


def primal_value(task: TaskSpec, db: PatternDB, model: Model, lam: float,
                 z=None) -> float:
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if z is None:
        z = margins(task, db, model)
    return float(np.sum(task.loss(z)) + lam * model.l1_norm)


def dual_value(task: TaskSpec, db: PatternDB, theta, lam: float) -> float:
    theta = getattr(theta, "theta", theta)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (db.n,):
        raise ValueError(f"dual vector must have length {db.n}")
    return float(-0.5 * lam * lam * (theta @ theta) + lam * (task.delta(db) @ theta))


def raw_dual(task: TaskSpec, db: PatternDB, model: Model, lam: float,
             z=None) -> np.ndarray:
    """Unscaled dual candidate ``-f'(z) / lam``."""
    if z is None:
        z = margins(task, db, model)
    return -task.dloss(z) / lam


def dual_feasible_point(task: TaskSpec, db: PatternDB, model: Model, lam: float,
                        constraint_max: float, z=None) -> DualPoint:
    """Scale the raw dual candidate into the feasible region.

    ``constraint_max`` is ``max_t |alpha_t . raw|`` over the pattern set whose
    constraints must hold (the whole tree, or a working set).
    """
    if constraint_max < 0 or not np.isfinite(constraint_max):
        raise ValueError(f"constraint_max must be a finite nonnegative number, "
                         f"got {constraint_max}")
    raw = raw_dual(task, db, model, lam, z)
    scale = max(1.0, float(constraint_max))
    return DualPoint(raw / scale, scale, float(constraint_max))


def intercept_gradient(task: TaskSpec, db: PatternDB, s, b) -> float:
    """d/db of the loss sum, ``sum_i beta_i f'(z_i)``."""
    z = margins_from_linear(task, db, s, b)
    return float(task.beta(db) @ task.dloss(z))


def fit_intercept(task: TaskSpec, db: PatternDB, s, b0: float = 0.0,
                  tol: float = STATIONARITY_TOL) -> float:
    """Minimize the loss sum over the intercept with ``s = Xw`` fixed.

    Regression has a closed form.  Classification uses safeguarded Newton
    on the piecewise-linear derivative, falling back to bisection.
    """
    s = np.ascontiguousarray(s, dtype=float)
    y = db.responses
    if task.is_classification and (not (y > 0).any() or not (y < 0).any()):
        raise ValueError("classification needs both classes to fix the intercept")
    return float(intercept(y, s, float(b0), task.is_classification, tol))
