import numpy as np
import pytest

from conftest import task_of
from spp import oracle
from spp.path import (PathConfig, lambda_grid, objectives, run_boosting_path,
                      run_naive_oracle, run_path, run_spp_path)
from spp.pattern_db import PatternDB
from spp.screening import ScreeningError
from spp.task import REGRESSION


def test_grid_examples():
    assert lambda_grid(2.0, PathConfig(num_lambdas=2)) == pytest.approx([2.0, 0.2, 0.02])
    assert lambda_grid(2.0, PathConfig(num_lambdas=0)) == [2.0]
    with pytest.raises(ValueError):
        PathConfig(lambda_min_ratio=1.0)


@pytest.mark.parametrize("kwargs", [dict(num_lambdas=-1), dict(tol=0.0), dict(maxpat=0),
                                    dict(method="lars"), dict(lambda_min_ratio=0.0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PathConfig(**kwargs)


def test_tiny_path(tiny):
    res = run_spp_path(tiny, REGRESSION, PathConfig(num_lambdas=2, maxpat=2))
    assert res.lambdas == pytest.approx([2.0, 0.2, 0.02])
    assert res.records[0].model.weights == {} and res.records[0].gap == 0.0
    assert res.records[0].model.intercept == 0.0
    assert all(r.gap <= 1e-6 for r in res.records)


def test_constant_response_rejected():
    db = PatternDB.from_rows([[0], [1]], [1.0, 1.0])
    for method in ("spp", "boosting", "naive"):
        with pytest.raises(ScreeningError):
            run_path(db, REGRESSION, PathConfig(method=method, num_lambdas=2))


def test_boosting_adds_nothing_at_lambda_max(tiny):
    res = run_boosting_path(tiny, REGRESSION, PathConfig(num_lambdas=0, maxpat=2))
    assert len(res.records) == 1 and res.records[0].model.weights == {}


def test_boosting_tie_takes_first(tiny):
    res = run_boosting_path(tiny, REGRESSION, PathConfig(num_lambdas=1, maxpat=2,
                                                         lambda_min_ratio=0.99))
    assert res.records[1].working_set[0] == (0,)


def test_methods_agree(task_name):
    task = task_of(task_name)
    for seed in range(4):
        db = oracle.random_instance(seed, task.kind)
        cfg = dict(num_lambdas=15, maxpat=1 + seed % 3)
        ref = objectives(db, task, run_naive_oracle(db, task, PathConfig(**cfg)))
        for method in ("spp", "boosting"):
            got = objectives(db, task, run_path(db, task, PathConfig(method=method, **cfg)))
            assert np.allclose(got, ref, rtol=1e-6, atol=0)


def test_verify_records_max(task_name):
    task = task_of(task_name)
    db = oracle.random_instance(1, task.kind)
    res = run_spp_path(db, task, PathConfig(num_lambdas=10, maxpat=3, verify=True))
    assert res.records[0].verify_max is None
    assert all(abs(r.verify_max - 1.0) <= 1e-9 or r.verify_max < 1.0
               for r in res.records[1:])


def test_threads_do_not_change_path(task_name):
    task = task_of(task_name)
    db = oracle.random_instance(2, task.kind)
    a = run_spp_path(db, task, PathConfig(num_lambdas=10, maxpat=3))
    b = run_spp_path(db, task, PathConfig(num_lambdas=10, maxpat=3, threads=3))
    assert [r.model.weights for r in a.records] == [r.model.weights for r in b.records]
    assert [r.nodes_visited for r in a.records] == [r.nodes_visited for r in b.records]
