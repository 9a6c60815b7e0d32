"""Transaction database and file ingestion.

A database holds ``n`` transactions (sorted, deduplicated item-id tuples)
and a response vector.  The binary design matrix ``x[i, t] = 1`` iff
pattern ``t`` is a subset of transaction ``i`` is never materialized; it
is reached through occurrence lists.
"""

from __future__ import annotations

import hashlib
import json
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMATS = ("libsvm", "transaction_list")
TASKS = ("regression", "classification")

_FORMAT_ALIASES = {"libsvm": "libsvm", "tlist": "transaction_list",
                   "transaction_list": "transaction_list"}
_TASK_ALIASES = {"reg": "regression", "regression": "regression",
                 "clf": "classification", "classification": "classification"}


class DataError(ValueError):
    """Raised for malformed input files or invalid databases."""


def normalize_format(fmt: str) -> str:
    try:
        return _FORMAT_ALIASES[fmt]
    except KeyError:
        raise DataError(f"unknown format {fmt!r}") from None


def normalize_task(task: str) -> str:
    try:
        return _TASK_ALIASES[task]
    except KeyError:
        raise DataError(f"unknown task {task!r}") from None


@dataclass(frozen=True, eq=False)
class PatternDB:
    """Immutable transaction database.

    Attributes
    ----------
    transactions : tuple of tuple of int
        Row ``i`` holds the strictly increasing item ids of transaction ``i``.
    responses : ndarray, shape (n,)
        Real responses, or +1/-1 labels for classification.
    num_items : int
        ``1 + max item id`` (0 for a database without any items).
    item_names : dict
        Internal item id -> raw id as it appeared in the input file.
    """

    transactions: tuple
    responses: np.ndarray
    num_items: int
    task: str = "regression"
    item_names: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.transactions)
        if n < 1:
            raise DataError("database must contain at least one transaction")
        y = np.asarray(self.responses, dtype=float)
        if y.shape != (n,):
            raise DataError(f"expected {n} responses, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise DataError("responses must be finite")
        if self.task not in TASKS:
            raise DataError(f"unknown task {self.task!r}")
        if self.task == "classification" and not np.all(np.abs(y) == 1.0):
            bad = int(np.flatnonzero(np.abs(y) != 1.0)[0])
            raise DataError(f"invalid class label at row {bad}")
        for i, row in enumerate(self.transactions):
            if any(b <= a for a, b in zip(row, row[1:])):
                raise DataError(f"items of row {i} are not strictly increasing")
            if row and (row[0] < 0 or row[-1] >= self.num_items):
                raise DataError(f"item id out of range in row {i}")
        y.setflags(write=False)
        object.__setattr__(self, "responses", y)
        vertical = [[] for _ in range(self.num_items)]
        for i, row in enumerate(self.transactions):
            for item in row:
                vertical[item].append(i)
        rows = tuple(np.array(v, dtype=np.int64) for v in vertical)
        for r in rows:
            r.setflags(write=False)
        object.__setattr__(self, "_item_rows", rows)

    @classmethod
    def from_rows(cls, rows, responses, task="regression", num_items=None,
                  item_names=None):
        """Build a database from arbitrary iterables of item ids.

        Items are sorted and deduplicated per row.
        """
        transactions = tuple(tuple(sorted(set(int(t) for t in row))) for row in rows)
        if num_items is None:
            num_items = 1 + max((r[-1] for r in transactions if r), default=-1)
        if item_names is None:
            used = sorted({t for r in transactions for t in r})
            item_names = {t: t for t in used}
        return cls(transactions, np.asarray(responses, dtype=float),
                   int(num_items), normalize_task(task), dict(item_names))

    @property
    def n(self) -> int:
        return len(self.transactions)

    def item_rows(self, item: int) -> np.ndarray:
        """Sorted rows containing ``item``."""
        return self._item_rows[item]

    def support(self, pattern) -> np.ndarray:
        """Sorted rows where every item of ``pattern`` occurs."""
        pattern = tuple(pattern)
        if not pattern:
            raise ValueError("pattern must be non-empty")
        if any(t < 0 or t >= self.num_items for t in pattern):
            return np.empty(0, dtype=np.int64)
        rows = self._item_rows[pattern[0]]
        for item in pattern[1:]:
            rows = np.intersect1d(rows, self._item_rows[item], assume_unique=True)
            if rows.size == 0:
                break
        return rows

    def fingerprint(self) -> dict:
        h = hashlib.sha256()
        for row, y in zip(self.transactions, self.responses):
            h.update(repr(float(y)).encode())
            h.update(b"\t")
            h.update(" ".join(map(str, row)).encode())
            h.update(b"\n")
        return {"n": self.n, "num_items": self.num_items,
                "nnz": sum(len(r) for r in self.transactions),
                "sha256": h.hexdigest()}

    def decode(self, pattern) -> list:
        """Map internal item ids back to the raw ids of the input file."""
        return [self.item_names.get(t, t) for t in pattern]


def occurs(db: PatternDB, pattern, i: int) -> bool:
    """True iff every item of ``pattern`` is in transaction ``i``."""
    if not 0 <= i < db.n:
        raise IndexError(f"row {i} out of range for n={db.n}")
    row = db.transactions[i]
    for item in pattern:
        k = bisect_left(row, item)
        if k == len(row) or row[k] != item:
            return False
    return True


def _parse_label(token: str, task: str, lineno: int) -> float:
    try:
        y = float(token)
    except ValueError:
        raise DataError(f"cannot parse label {token!r} at line {lineno}") from None
    if not np.isfinite(y):
        raise DataError(f"non-finite label at line {lineno}")
    if task == "classification" and y not in (1.0, -1.0):
        raise DataError(f"invalid class label at line {lineno}")
    return y


def _parse_libsvm(line: str, lineno: int) -> list:
    items = []
    for tok in line.split()[1:]:
        idx, sep, val = tok.partition(":")
        try:
            if not sep:
                raise ValueError
            idx_i = int(idx)
            val_f = float(val)
        except ValueError:
            raise DataError(f"cannot parse feature {tok!r} at line {lineno}") from None
        if idx_i < 1:
            raise DataError(f"libsvm index must be >= 1 at line {lineno}")
        if val_f != 0.0:
            items.append(idx_i - 1)
    return items


def _parse_tlist(line: str, lineno: int) -> tuple:
    label, tab, rest = line.partition("\t")
    if not tab:
        # tolerate a label-only line with no separator
        parts = line.split(None, 1)
        label, rest = parts[0], parts[1] if len(parts) > 1 else ""
    try:
        items = [int(tok) for tok in rest.split()]
    except ValueError:
        raise DataError(f"cannot parse item list at line {lineno}") from None
    if any(t < 0 for t in items):
        raise DataError(f"negative item id at line {lineno}")
    return label.strip(), items


def load_transactions(path, format: str = "transaction_list",
                      task: str = "regression") -> PatternDB:
    """Read a LIBSVM or transaction-list file into a :class:`PatternDB`.

    LIBSVM features with a nonzero value become items (1-based index mapped
    to 0-based id).  Transaction lists hold ``label<TAB>i1 i2 ...`` per line.
    Blank lines are skipped; line numbers in errors are 1-based.
    """
    fmt = normalize_format(format)
    task = normalize_task(task)
    text = Path(path).read_text(encoding="utf-8")
    rows, labels = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if fmt == "libsvm":
            label = line.split(None, 1)[0]
            items = _parse_libsvm(line, lineno)
        else:
            label, items = _parse_tlist(line, lineno)
        labels.append(_parse_label(label, task, lineno))
        rows.append(items)
    if not rows:
        raise DataError(f"no transactions in {path}")
    db = PatternDB.from_rows(rows, labels, task=task)
    if fmt == "libsvm":
        object.__setattr__(db, "item_names", {t: t + 1 for t in db.item_names})
    return db


def _format_label(y: float) -> str:
    return str(int(y)) if float(y).is_integer() else repr(float(y))


def dumps_transactions(db: PatternDB) -> str:
    """Canonical transaction-list text for ``db``."""
    lines = []
    for row, y in zip(db.transactions, db.responses):
        label = _format_label(y)
        if db.task == "classification":
            label = "+1" if y > 0 else "-1"
        lines.append(label + "\t" + " ".join(map(str, row)))
    return "\n".join(lines) + "\n"


def save_transactions(db: PatternDB, path) -> None:
    Path(path).write_text(dumps_transactions(db), encoding="utf-8")


def save_item_map(db: PatternDB, path) -> None:
    table = {str(k): v for k, v in sorted(db.item_names.items())}
    Path(path).write_text(json.dumps(table, indent=1) + "\n", encoding="utf-8")
