from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spp.pattern_db import PatternDB
from spp.tree import (EnumerationOrderError, TreeNode, children, extend, iter_patterns,
                      root_children, traverse)


def test_root_children(tiny):
    nodes = root_children(tiny)
    assert [n.pattern for n in nodes] == [(0,), (1,)]
    assert [n.occ.tolist() for n in nodes] == [[0, 1], [1, 2]]


def test_unused_item_has_no_node():
    db = PatternDB.from_rows([[0], [2]], [1.0, 2.0], num_items=3)
    assert [n.pattern for n in root_children(db)] == [(0,), (2,)]


def test_extend(tiny):
    a, b = root_children(tiny)
    child = extend(a, 1, tiny)
    assert child.pattern == (0, 1) and child.occ.tolist() == [1]
    assert extend(b, 2, tiny) is None
    with pytest.raises(EnumerationOrderError):
        extend(b, 0, tiny)


def test_traverse_visits_all(tiny):
    seen = []
    kept, stats = traverse(tiny, 2, lambda n: (seen.append(n.pattern) or True, False))
    assert seen == [(0,), (0, 1), (1,)]
    assert stats.nodes_visited == 3
    assert [n.pattern for n in kept] == seen


def test_prune_at_depth_one(tiny):
    seen = []
    _, stats = traverse(tiny, 3, lambda n: (seen.append(n.pattern), True))
    assert seen == [(0,), (1,)]
    assert stats.nodes_pruned == 2


def test_maxpat_one(tiny):
    assert [n.pattern for n in iter_patterns(tiny, 1)] == [(0,), (1,)]


def brute(db, maxpat):
    out = {}
    for k in range(1, maxpat + 1):
        for p in combinations(range(db.num_items), k):
            occ = [i for i, r in enumerate(db.transactions) if set(p) <= set(r)]
            if occ:
                out[p] = occ
    return out


rows_st = st.lists(st.lists(st.integers(0, 6), min_size=1, max_size=5),
                   min_size=1, max_size=10)


@settings(max_examples=50, deadline=None)
@given(rows=rows_st, maxpat=st.integers(1, 4))
def test_complete_and_unique(rows, maxpat):
    db = PatternDB.from_rows(rows, np.zeros(len(rows)))
    got = list(iter_patterns(db, maxpat))
    pats = [n.pattern for n in got]
    assert len(pats) == len(set(pats))
    assert {n.pattern: n.occ.tolist() for n in got} == brute(db, maxpat)


@settings(max_examples=25, deadline=None)
@given(rows=rows_st)
def test_threads_same_result(rows):
    db = PatternDB.from_rows(rows, np.zeros(len(rows)))
    one, s1 = traverse(db, 3, lambda n: (len(n.occ) > 1, False))
    many, s4 = traverse(db, 3, lambda n: (len(n.occ) > 1, False), threads=4)
    assert [n.pattern for n in one] == [n.pattern for n in many]
    assert s1.nodes_visited == s4.nodes_visited


def test_node_properties():
    node = TreeNode((1, 3), np.array([0, 2], dtype=np.int64), 4)
    assert node.depth == 2
    assert node.occ_key == np.array([0, 2], dtype=np.int64).tobytes()
    db = PatternDB.from_rows([[1, 3], [0], [1, 3]], [0.0, 1.0, 2.0])
    assert children(node, db) == []
