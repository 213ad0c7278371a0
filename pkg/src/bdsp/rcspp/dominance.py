"""Pareto filtering of minimisation vectors.

``KDStore`` is a k-d tree where every node keeps the componentwise minimum of
its subtree; a query that is not dominated by that bound skips the subtree.
``two_stage_filter`` inserts without deletions, then re-filters in reverse
insertion order, leaving exactly the mutually non-dominated vectors (the
first of any group of equal vectors survives).
"""
from __future__ import annotations

from typing import Any, Iterable, Sequence


def weakly_dominates(a: Sequence, b: Sequence) -> bool:
    return all(x <= y for x, y in zip(a, b))


class _Node:
    __slots__ = ("vec", "item", "depth", "lo", "left", "right")

    def __init__(self, vec, item, depth):
        self.vec = vec
        self.item = item
        self.depth = depth
        self.lo = list(vec)
        self.left = None
        self.right = None


class KDStore:
    def __init__(self, k: int, prune: bool = True):
        self.k = k
        self.prune = prune
        self.root: _Node | None = None
        self.items: list[tuple[tuple, Any]] = []
        self.comparisons = 0

    def __len__(self) -> int:
        return len(self.items)

    def dominated(self, q: Sequence) -> bool:
        """True if some stored vector is componentwise <= ``q``."""
        if self.root is None:
            return False
        k = self.k
        rng = range(k)
        stack = [self.root]
        prune = self.prune
        while stack:
            node = stack.pop()
            if prune:
                lo = node.lo
                skip = False
                for i in rng:
                    if lo[i] > q[i]:
                        skip = True
                        break
                if skip:
                    continue
            self.comparisons += 1
            v = node.vec
            for i in rng:
                if v[i] > q[i]:
                    break
            else:
                return True
            dim = node.depth % k
            if node.left is not None:
                stack.append(node.left)
            if node.right is not None and (not prune or v[dim] <= q[dim]):
                stack.append(node.right)
        return False

    def insert(self, vec: tuple, item: Any = None) -> None:
        self.items.append((vec, item))
        if self.root is None:
            self.root = _Node(vec, item, 0)
            return
        k = self.k
        node = self.root
        while True:
            lo = node.lo
            for i in range(k):
                if vec[i] < lo[i]:
                    lo[i] = vec[i]
            dim = node.depth % k
            if vec[dim] < node.vec[dim]:
                if node.left is None:
                    node.left = _Node(vec, item, node.depth + 1)
                    return
                node = node.left
            else:
                if node.right is None:
                    node.right = _Node(vec, item, node.depth + 1)
                    return
                node = node.right

    def add(self, vec: tuple, item: Any = None) -> bool:
        """Insert unless dominated (first pass, no deletions)."""
        if self.dominated(vec):
            return False
        self.insert(vec, item)
        return True


def second_pass(store: KDStore) -> list[tuple[tuple, Any]]:
    """Re-filter a first-pass store in reverse insertion order.

    Returns survivors in their original insertion order.
    """
    fresh = KDStore(store.k, store.prune)
    kept = []
    for vec, item in reversed(store.items):
        if fresh.add(vec, item):
            kept.append((vec, item))
    kept.reverse()
    return kept


def two_stage_filter(vectors: Iterable[tuple], prune: bool = True) -> list[int]:
    """Indices of the non-dominated vectors, in input order."""
    vectors = list(vectors)
    if not vectors:
        return []
    store = KDStore(len(vectors[0]), prune)
    for idx, vec in enumerate(vectors):
        store.add(vec, idx)
    return [idx for _, idx in second_pass(store)]


def naive_filter(vectors: Sequence[tuple]) -> list[int]:
    """Quadratic reference: keep a vector unless another is <= it and either
    differs from it or comes earlier."""
    keep = []
    for i, v in enumerate(vectors):
        for j, w in enumerate(vectors):
            if j != i and weakly_dominates(w, v) and (w != v or j < i):
                break
        else:
            keep.append(i)
    return keep
