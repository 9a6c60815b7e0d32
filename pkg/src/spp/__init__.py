"""L1-penalized pattern models with safe pattern pruning."""

from .pattern_db import DataError, PatternDB, load_transactions, occurs
from .path import (PathConfig, PathResult, lambda_grid, run_boosting_path,
                   run_naive_oracle, run_path, run_spp_path)
from .screening import lambda_max, safe_screen
from .solver import WorkingSet, solve
from .task import CLASSIFICATION, REGRESSION, Model, TaskSpec

__version__ = "0.1.0"

__all__ = [
    "CLASSIFICATION", "DataError", "Model", "PathConfig", "PathResult",
    "PatternDB", "REGRESSION", "TaskSpec", "WorkingSet", "lambda_grid",
    "lambda_max", "load_transactions", "occurs", "run_boosting_path",
    "run_naive_oracle", "run_path", "run_spp_path", "safe_screen", "solve",
]
