"""Regularization paths: safe pattern pruning, boosting, and brute force.

All three methods share the same geometric lambda grid, warm starts, and
per-lambda record layout, so their objectives and traversal counts can be
compared directly.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .pattern_db import PatternDB
from .screening import (ScreeningError, gap_certificate, lambda_max_point,
                        max_abs_inner, safe_screen)
from .solver import DEFAULT_MAX_EPOCHS, WorkingSet, solve
from .task import Model, TaskSpec, dual_feasible_point, margins, primal_value

log = logging.getLogger(__name__)

METHODS = ("spp", "boosting", "naive")


class SolverAbort(RuntimeError):
    """The solver failed to reach the gap tolerance even after re-screening."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


@dataclass
class PathConfig:
    num_lambdas: int = 100
    lambda_min_ratio: float = 0.01
    tol: float = 1e-6
    maxpat: int = 3
    method: str = "spp"
    verify: bool = False
    threads: int = 1
    max_epochs: int = DEFAULT_MAX_EPOCHS
    violation_tol: float = 1e-6
    boosting_add: int = 1
    naive_cap: int = oracle.DEFAULT_CAP
    naive_tol: float = 1e-9

    def __post_init__(self):
        if self.num_lambdas < 0:
            raise ValueError("num_lambdas must be >= 0")
        if not 0.0 < self.lambda_min_ratio < 1.0:
            raise ValueError("lambda_min_ratio must lie in (0, 1)")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.maxpat < 1:
            raise ValueError("maxpat must be >= 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.boosting_add < 1:
            raise ValueError("boosting_add must be >= 1")


@dataclass
class PathRecord:
    lam: float
    model: Model
    gap: float
    n_kept: int
    nodes_visited: int = 0
    nodes_pruned: int = 0
    solve_epochs: int = 0
    traverse_ms: float = 0.0
    solve_ms: float = 0.0
    converged: bool = True
    verify_max: float | None = None
    working_set: list = field(default_factory=list, repr=False)

    @property
    def n_active(self) -> int:
        return len(self.model.weights)


@dataclass
class PathResult:
    method: str
    lambda_max: float
    records: list

    @property
    def lambdas(self) -> list:
        return [r.lam for r in self.records]

    def total_nodes(self) -> int:
        return sum(r.nodes_visited for r in self.records)


def lambda_grid(lam_max: float, config: PathConfig) -> list:
    if not lam_max > 0:
        raise ValueError("lambda_max must be positive")
    K = config.num_lambdas
    if K == 0:
        return [float(lam_max)]
    return [float(lam_max * config.lambda_min_ratio ** (k / K)) for k in range(K + 1)]


class _Clock:
    def __init__(self):
        self.ms = 0.0

    def __enter__(self):
        self._t = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms += 1000.0 * (time.perf_counter() - self._t)


def _start(db, task, config):
    """lambda_max record: zero weights, stationary intercept, zero gap."""
    if np.unique(db.responses).size < 2:
        raise ScreeningError("lambda_max = 0; path undefined (constant response)")
    with _Clock() as clock:
        res, b0 = lambda_max_point(db, task, config.maxpat)
    if not res.value > 0:
        raise ScreeningError("lambda_max = 0; path undefined")
    lam0 = res.value
    model = Model({}, b0, lam0)
    # the raw dual point at lambda_max has constraint maximum exactly one
    theta = dual_feasible_point(task, db, model, lam0, 1.0)
    cert = gap_certificate(task, db, model, theta, lam0)
    rec = PathRecord(lam0, model, cert.gap, 0, res.stats.nodes_visited,
                     res.stats.nodes_pruned, 0, clock.ms, 0.0)
    return lam0, model, rec


def _remap_init(prev: Model, ws: WorkingSet, supports: dict) -> Model:
    """Carry previous weights onto working-set columns by occurrence list."""
    weights = {}
    for p, v in prev.weights.items():
        j = ws.by_occ.get(supports[p].tobytes())
        if j is not None:
            q = ws.patterns[j]
            weights[q] = weights.get(q, 0.0) + v
    return Model(weights, prev.intercept, prev.lam)


def _verify(db, task, config, theta):
    res = max_abs_inner(db, task, config.maxpat, theta.theta)
    return res.value


def _screen(db, task, config, prev, lam, supports):
    """Dual point from the previous model at ``lam`` plus one safe screen."""
    z = margins(task, db, prev, supports)
    raw = -task.dloss(z) / lam
    scale = max_abs_inner(db, task, config.maxpat, raw)
    theta = dual_feasible_point(task, db, prev, lam, scale.value, z=z)
    kept, stats, cert = safe_screen(db, task, config.maxpat, prev, theta, lam,
                                    threads=config.threads, z=z)
    stats.merge(scale.stats)
    return kept, stats, cert


def run_spp_path(db: PatternDB, task: TaskSpec, config: PathConfig) -> PathResult:
    lam0, model, first = _start(db, task, config)
    records = [first]
    supports = {}
    for lam in lambda_grid(lam0, config)[1:]:
        rec = None
        nodes = pruned = 0
        traverse_ms = solve_ms = 0.0
        epochs = 0
        start = model
        for attempt in range(2):
            with _Clock() as clock:
                kept, stats, _ = _screen(db, task, config, start, lam, supports)
            traverse_ms += clock.ms
            nodes += stats.nodes_visited
            pruned += stats.nodes_pruned
            ws = WorkingSet.from_nodes(kept)
            supports.update(ws.supports())
            init = _remap_init(start, ws, supports)
            with _Clock() as clock:
                new, theta, report = solve(db, task, ws, lam, init, config.tol,
                                           config.max_epochs)
            solve_ms += clock.ms
            epochs += report.iterations
            if report.converged:
                break
            # re-screen around the better iterate and retry once
            supports.update(ws.supports())
            start = new
        rec = PathRecord(lam, new, report.final_gap, len(ws), nodes, pruned, epochs,
                         traverse_ms, solve_ms, report.converged,
                         working_set=list(ws.patterns))
        if not report.converged:
            raise SolverAbort(f"solver did not reach gap {config.tol:g} at "
                              f"lambda={lam:.6g} (gap {report.final_gap:.3e})", rec)
        if config.verify:
            rec.verify_max = _verify(db, task, config, theta)
            if rec.verify_max > 1.0 + 10 * config.tol:
                log.warning("lambda=%.6g: dual constraint violated outside the "
                            "screened set (max %.9f)", lam, rec.verify_max)
        records.append(rec)
        model = new
    return PathResult("spp", lam0, records)


def run_boosting_path(db: PatternDB, task: TaskSpec, config: PathConfig) -> PathResult:
    """Cutting-plane baseline: grow the working set by the most violated constraint."""
    lam0, model, first = _start(db, task, config)
    records = [first]
    patterns, occs = [], []
    supports = {}
    for lam in lambda_grid(lam0, config)[1:]:
        nodes = pruned = 0
        traverse_ms = solve_ms = 0.0
        epochs = 0
        while True:
            ws = WorkingSet(patterns, occs)
            with _Clock() as clock:
                model, theta, report = solve(db, task, ws, lam, model, config.tol,
                                             config.max_epochs)
            solve_ms += clock.ms
            epochs += report.iterations
            if not report.converged:
                rec = PathRecord(lam, model, report.final_gap, len(ws), nodes, pruned,
                                 epochs, traverse_ms, solve_ms, False)
                raise SolverAbort(f"boosting solve did not converge at "
                                  f"lambda={lam:.6g}", rec)
            z = margins(task, db, model, supports)
            raw = -task.dloss(z) / lam
            added = 0
            exclude = set(ws.by_occ)
            with _Clock() as clock:
                while added < config.boosting_add:
                    res = max_abs_inner(db, task, config.maxpat, raw, exclude=exclude)
                    nodes += res.stats.nodes_visited
                    pruned += res.stats.nodes_pruned
                    if res.pattern is None or res.value <= 1.0 + config.violation_tol:
                        break
                    patterns.append(res.pattern)
                    occs.append(res.occ)
                    supports[res.pattern] = res.occ
                    exclude.add(res.occ.tobytes())
                    added += 1
            traverse_ms += clock.ms
            if added == 0:
                break
        rec = PathRecord(lam, model, report.final_gap, len(ws), nodes, pruned, epochs,
                         traverse_ms, solve_ms, True, working_set=list(ws.patterns))
        if config.verify:
            rec.verify_max = _verify(db, task, config, theta)
        records.append(rec)
    return PathResult("boosting", lam0, records)


def run_naive_oracle(db: PatternDB, task: TaskSpec, config: PathConfig) -> PathResult:
    """Exact reference path over every enumerated pattern (desk scale only)."""
    with _Clock() as clock:
        prob = oracle.enumerate_all(db, task, config.maxpat, config.naive_cap)
    lam0 = oracle.dense_lambda_max(prob)
    if not lam0 > 0:
        raise ScreeningError("lambda_max = 0; path undefined")
    records = []
    w = np.zeros(prob.n_patterns)
    for k, lam in enumerate(lambda_grid(lam0, config)):
        with _Clock() as sclock:
            w, b, gap = oracle.solve_dense(prob, lam, config.naive_tol, init=w)
        model = oracle.dense_model(prob, w, b, lam)
        rec = PathRecord(lam, model, gap, prob.n_patterns,
                         prob.n_patterns if k == 0 else 0, 0, 0,
                         clock.ms if k == 0 else 0.0, sclock.ms,
                         working_set=list(prob.patterns))
        records.append(rec)
    return PathResult("naive", lam0, records)


def run_path(db: PatternDB, task: TaskSpec, config: PathConfig) -> PathResult:
    runner = {"spp": run_spp_path, "boosting": run_boosting_path,
              "naive": run_naive_oracle}[config.method]
    return runner(db, task, config)


def objectives(db: PatternDB, task: TaskSpec, result: PathResult) -> list:
    return [primal_value(task, db, r.model, r.lam) for r in result.records]
