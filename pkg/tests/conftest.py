import pytest

from spp.pattern_db import PatternDB
from spp.task import CLASSIFICATION, REGRESSION


@pytest.fixture
def tiny():
    """Rows {a}, {a,b}, {b} with y = [2, 0, -2]."""
    return PatternDB.from_rows([[0], [0, 1], [1]], [2.0, 0.0, -2.0], "regression")


@pytest.fixture
def tiny_clf():
    return PatternDB.from_rows([[0], [0, 1], [1], [0, 2]], [1, -1, -1, 1], "classification")


@pytest.fixture(params=["regression", "classification"])
def task_name(request):
    return request.param


def task_of(name):
    return CLASSIFICATION if name == "classification" else REGRESSION


def feasible_theta(rng, db, task):
    """Random dual point with beta . theta = 0 (and theta >= 0 for classification)."""
    beta = task.beta(db)
    if task.is_classification:
        pos, neg = beta > 0, beta < 0
        t = rng.exponential(size=db.n)
        # rescale one class so the two sums match
        t[neg] *= t[pos].sum() / t[neg].sum()
        return t * rng.uniform(0.1, 2.0)
    t = rng.standard_normal(db.n)
    return t - t.mean()
