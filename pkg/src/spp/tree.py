"""Set-enumeration tree over item-set patterns.

Each node extends its parent by one item larger than every item already in
the pattern, so every item-set is reached exactly once.  Children are
produced by projecting the parent's occurrence rows (vertical, eclat-style),
which never creates support-zero nodes.
"""

from __future__ import annotations

from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .pattern_db import PatternDB


@dataclass(eq=False)
class TreeNode:
    pattern: tuple
    occ: np.ndarray
    tail: int

    @property
    def depth(self) -> int:
        return len(self.pattern)

    @property
    def occ_key(self) -> bytes:
        return self.occ.tobytes()


@dataclass
class TraverseStats:
    nodes_visited: int = 0
    nodes_pruned: int = 0
    max_depth_reached: int = 0

    def merge(self, other: "TraverseStats") -> "TraverseStats":
        self.nodes_visited += other.nodes_visited
        self.nodes_pruned += other.nodes_pruned
        self.max_depth_reached = max(self.max_depth_reached, other.max_depth_reached)
        return self


class EnumerationOrderError(ValueError):
    pass


def root_children(db: PatternDB) -> list:
    nodes = []
    for item in range(db.num_items):
        rows = db.item_rows(item)
        if rows.size:
            nodes.append(TreeNode((item,), rows, item + 1))
    return nodes


def extend(node: TreeNode, item: int, db: PatternDB):
    """Child ``node.pattern + (item,)``, or None when its support is empty."""
    if item < node.tail:
        raise EnumerationOrderError(
            f"item {item} precedes tail {node.tail} of pattern {node.pattern}")
    if item >= db.num_items:
        return None
    occ = np.intersect1d(node.occ, db.item_rows(item), assume_unique=True)
    if occ.size == 0:
        return None
    return TreeNode(node.pattern + (item,), occ, item + 1)


def children(node: TreeNode, db: PatternDB) -> list:
    """All support-nonzero children in item order, by occurrence projection."""
    buckets = {}
    transactions = db.transactions
    tail = node.tail
    for i in node.occ.tolist():
        row = transactions[i]
        for item in row[bisect_left(row, tail):]:
            bucket = buckets.get(item)
            if bucket is None:
                buckets[item] = [i]
            else:
                bucket.append(i)
    return [TreeNode(node.pattern + (item,), np.array(buckets[item], dtype=np.int64),
                     item + 1)
            for item in sorted(buckets)]


def _walk(db, maxpat, visitor, start, collected, stats):
    stack = [start]
    while stack:
        node = stack.pop()
        keep, prune = visitor(node)
        stats.nodes_visited += 1
        if node.depth > stats.max_depth_reached:
            stats.max_depth_reached = node.depth
        if keep:
            collected.append(node)
        if prune:
            stats.nodes_pruned += 1
            continue
        if node.depth >= maxpat:
            continue
        stack.extend(reversed(children(node, db)))


def traverse(db: PatternDB, maxpat: int, visitor, threads: int = 1):
    """Depth-first traversal in item-id order.

    ``visitor(node)`` returns ``(keep, prune_subtree)``.  Nodes at depth
    ``maxpat`` are visited but not expanded.  With ``threads > 1`` the
    root-child subtrees are walked concurrently; results are merged in item
    order so the collected list does not depend on scheduling.
    """
    if maxpat < 1:
        raise ValueError("maxpat must be >= 1")
    roots = root_children(db)
    if threads <= 1 or len(roots) < 2:
        collected, stats = [], TraverseStats()
        for root in roots:
            _walk(db, maxpat, visitor, root, collected, stats)
        return collected, stats

    def job(root):
        part, st = [], TraverseStats()
        _walk(db, maxpat, visitor, root, part, st)
        return part, st

    collected, stats = [], TraverseStats()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for part, st in pool.map(job, roots):
            collected.extend(part)
            stats.merge(st)
    return collected, stats


def iter_patterns(db: PatternDB, maxpat: int):
    """Every support-nonzero pattern up to ``maxpat`` items, unpruned."""
    nodes, _ = traverse(db, maxpat, lambda node: (True, False))
    return nodes
