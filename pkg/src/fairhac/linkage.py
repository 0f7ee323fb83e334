"""Euclidean base distances, linkage criteria and the incrementally updated cluster distance matrix."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .core import FairHACError

CRITERIA = ("single", "complete", "average")


def check_criterion(criterion: str) -> str:
    if criterion not in CRITERIA:
        raise FairHACError(f"unknown linkage criterion {criterion!r}; expected one of {CRITERIA}")
    return criterion


def base_distance(x, y) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise FairHACError(f"dimension mismatch: {x.size} vs {y.size}")
    return float(np.sqrt(np.sum((x - y) ** 2)))


def pairwise_distances(points) -> np.ndarray:
    """Symmetric ``n x n`` Euclidean distance matrix with an exact zero diagonal."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def linkage_distance(ci: Iterable[int], cj: Iterable[int], criterion: str, base: np.ndarray) -> float:
    """Linkage distance between two disjoint point-id sets over precomputed base distances."""
    check_criterion(criterion)
    a = np.fromiter(ci, dtype=np.int64)
    b = np.fromiter(cj, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        raise FairHACError("clusters must be non-empty")
    if np.intersect1d(a, b).size:
        raise FairHACError("clusters overlap")
    block = base[np.ix_(a, b)]
    if criterion == "single":
        return float(block.min())
    if criterion == "complete":
        return float(block.max())
    return float(block.mean())


class DistanceMatrix:
    """Between-cluster linkage distances over the live clusters of an agglomeration.

    Rows are indexed by dendrogram node id, so merging clusters ``a`` and ``b``
    creates row ``n + i`` for the ``i``-th merge. Updates use the Lance-Williams
    recurrences; with ``exhaustive=True`` each new row is instead recomputed from
    the member point sets (slow, kept as a test oracle).
    """

    def __init__(self, base: np.ndarray, criterion: str, exhaustive: bool = False):
        self.criterion = check_criterion(criterion)
        base = np.asarray(base, dtype=np.float64)
        n = base.shape[0]
        self.base = base
        self.n_leaves = n
        self.exhaustive = exhaustive
        cap = max(2 * n - 1, 1)
        self.entries = np.full((cap, cap), np.inf)
        self.entries[:n, :n] = base
        self.sizes = np.zeros(cap, dtype=np.int64)
        self.sizes[:n] = 1
        self.active: list[int] = list(range(n))
        self.next_id = n
        self.members: dict[int, list[int]] = {i: [i] for i in range(n)} if exhaustive else {}

    @classmethod
    def from_points(cls, points, criterion: str, exhaustive: bool = False) -> "DistanceMatrix":
        return cls(pairwise_distances(points), criterion, exhaustive)

    @property
    def size(self) -> int:
        return len(self.active)

    def distance(self, a: int, b: int) -> float:
        return float(self.entries[a, b])

    def active_ids(self) -> np.ndarray:
        return np.asarray(self.active, dtype=np.int64)

    def submatrix(self) -> tuple[np.ndarray, np.ndarray]:
        """``(ids, D)`` for the live clusters, ids ascending."""
        ids = self.active_ids()
        return ids, self.entries[np.ix_(ids, ids)]

    def merge(self, a: int, b: int) -> int:
        """Replace live clusters ``a`` and ``b`` by their union; return the new id."""
        if a == b or a not in self.active or b not in self.active:
            raise FairHACError(f"cannot merge {a} and {b}: not two distinct active clusters")
        new = self.next_id
        self.next_id += 1
        self.active.remove(a)
        self.active.remove(b)
        others = np.asarray(self.active, dtype=np.int64)
        sa, sb = self.sizes[a], self.sizes[b]
        if self.exhaustive:
            merged = self.members.pop(a) + self.members.pop(b)
            row = np.array([linkage_distance(merged, self.members[o], self.criterion, self.base) for o in others])
            self.members[new] = merged
        else:
            da, db = self.entries[a, others], self.entries[b, others]
            if self.criterion == "single":
                row = np.minimum(da, db)
            elif self.criterion == "complete":
                row = np.maximum(da, db)
            else:
                row = (sa * da + sb * db) / (sa + sb)
        self.entries[new, others] = row
        self.entries[others, new] = row
        self.entries[new, new] = 0.0
        self.entries[a, :] = self.entries[:, a] = np.inf
        self.entries[b, :] = self.entries[:, b] = np.inf
        self.sizes[new] = sa + sb
        self.active.append(new)
        return new


def update_after_merge(matrix: DistanceMatrix, a: int, b: int) -> DistanceMatrix:
    """Merge ``a`` and ``b`` in place and return the matrix for chaining."""
    matrix.merge(a, b)
    return matrix
