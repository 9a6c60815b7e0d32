import numpy as np
import pytest

from conftest import task_of
from spp import oracle
from spp.pattern_db import PatternDB
from spp.screening import lambda_max
from spp.solver import (WorkingSet, kkt_violation, restricted_dual, soft_threshold,
                        solve)
from spp.task import (REGRESSION, Model, dual_value, fit_intercept, margins,
                      primal_value)
from spp.tree import iter_patterns


def all_columns(db, maxpat):
    return WorkingSet.from_patterns(db, [n.pattern for n in iter_patterns(db, maxpat)])


@pytest.mark.parametrize("c,t,expected", [(3.0, 1.0, 2.0), (-3.0, 1.0, -2.0),
                                          (0.5, 1.0, 0.0), (1.0, 1.0, 0.0)])
def test_soft_threshold(c, t, expected):
    assert soft_threshold(c, t) == expected


def test_empty_working_set(tiny, tiny_clf):
    model, _, rep = solve(tiny, REGRESSION, WorkingSet([], []), 1.0)
    assert model.weights == {} and model.intercept == 0.0 and rep.final_gap == 0.0
    task = task_of("classification")
    model, _, rep = solve(tiny_clf, task, WorkingSet([], []), 1.0)
    assert model.intercept == fit_intercept(task, tiny_clf, np.zeros(tiny_clf.n))
    assert rep.converged


def test_working_set_validation(tiny):
    occ = np.array([0, 1])
    with pytest.raises(ValueError):
        WorkingSet([(0,), (0, 2)], [occ, occ])
    with pytest.raises(ValueError):
        WorkingSet([(5,)], [np.array([], dtype=np.int64)])


def test_from_patterns_keeps_first_duplicate():
    db = PatternDB.from_rows([[0, 1], [0, 1], [2]], [1.0, 2.0, 3.0])
    ws = WorkingSet.from_patterns(db, [(0,), (1,), (0, 1), (2,)])
    assert ws.patterns == [(0,), (2,)]


def test_lambda_max_gives_zero(task_name):
    task = task_of(task_name)
    for seed in range(10):
        db = oracle.random_instance(seed, task.kind)
        lam = lambda_max(db, task, 3)
        model, theta, rep = solve(db, task, all_columns(db, 3), lam, tol=1e-9)
        assert model.weights == {}
        assert rep.final_gap <= 1e-9
        ws = all_columns(db, 3)
        assert kkt_violation(db, task, ws, model, theta) <= 1e-9


def test_primal_trace_monotone_and_gap_recomputes(task_name):
    task = task_of(task_name)
    for seed in range(10):
        db = oracle.random_instance(seed, task.kind)
        ws = all_columns(db, 2)
        lam = 0.1 * lambda_max(db, task, 2)
        trace = []
        model, theta, rep = solve(db, task, ws, lam, tol=1e-8, trace=trace)
        assert rep.converged
        assert all(b <= a + 1e-9 * max(1.0, abs(a)) for a, b in zip(trace, trace[1:]))
        again = restricted_dual(task, db, ws, margins(task, db, model), lam)
        gap = primal_value(task, db, model, lam) - dual_value(task, db, again, lam)
        assert gap == pytest.approx(rep.final_gap, abs=1e-10)
        assert kkt_violation(db, task, ws, model, theta) <= 10 * np.sqrt(1e-8)


def test_matches_dense_oracle(task_name):
    task = task_of(task_name)
    for seed in range(8):
        db = oracle.random_instance(seed, task.kind)
        prob = oracle.enumerate_all(db, task, 2)
        lam = 0.2 * oracle.dense_lambda_max(prob)
        w, b, _ = oracle.solve_dense(prob, lam)
        ref = primal_value(task, db, oracle.dense_model(prob, w, b, lam), lam)
        model, _, _ = solve(db, task, WorkingSet.from_patterns(db, prob.patterns), lam,
                           tol=1e-9)
        assert primal_value(task, db, model, lam) == pytest.approx(ref, rel=1e-8)


def test_kkt_violation_detects_perturbation(tiny):
    ws = all_columns(tiny, 2)
    model, theta, _ = solve(tiny, REGRESSION, ws, 0.2, tol=1e-12)
    assert kkt_violation(tiny, REGRESSION, ws, model, theta) <= 1e-5
    bumped = Model(dict(model.weights), model.intercept)
    p = next(iter(bumped.weights))
    bumped.weights[p] += 0.1
    again = restricted_dual(REGRESSION, tiny, ws, margins(REGRESSION, tiny, bumped), 0.2)
    assert kkt_violation(tiny, REGRESSION, ws, bumped, again) > 0.0


def test_warm_start_drops_foreign_weights(tiny, caplog):
    ws = WorkingSet.from_patterns(tiny, [(0,)])
    model, _, rep = solve(tiny, REGRESSION, ws, 0.5, init=Model({(1,): 1.0}, 0.0))
    assert "dropping" in caplog.text
    assert set(model.weights) <= {(0,)} and rep.converged


def test_bad_arguments(tiny):
    with pytest.raises(ValueError):
        solve(tiny, REGRESSION, WorkingSet([], []), 0.0)
    with pytest.raises(ValueError):
        solve(tiny, REGRESSION, WorkingSet([], []), 1.0, tol=0.0)


def test_epoch_cap_reports_nonconvergence(tiny):
    _, _, rep = solve(tiny, REGRESSION, all_columns(tiny, 2), 0.01, tol=1e-14, max_epochs=1)
    assert not rep.converged and rep.iterations == 1
