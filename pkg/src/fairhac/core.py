"""Shared domain types: datasets, protected groups, dendrograms and flat clusterings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class FairHACError(ValueError):
    """Base class for invalid-input errors raised by this package."""


class InvalidGroupError(FairHACError):
    pass


class CutUnavailableError(FairHACError):
    pass


class UndefinedScoreError(FairHACError):
    pass


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ``n x m`` real feature matrix with stable point ids."""

    points: np.ndarray
    ids: tuple[int, ...] = ()

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise FairHACError(f"points must be a non-empty n x m matrix, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise FairHACError("points contain non-finite values")
        ids = tuple(int(i) for i in self.ids) if len(self.ids) else tuple(range(pts.shape[0]))
        if len(ids) != pts.shape[0]:
            raise FairHACError(f"{len(ids)} ids for {pts.shape[0]} points")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def take(self, rows: Sequence[int]) -> "Dataset":
        rows = list(rows)
        return Dataset(self.points[rows], tuple(self.ids[r] for r in rows))


def derive_ideal_proportions(group_of: Sequence[int], f: int | None = None) -> np.ndarray:
    """Return each group's share of the dataset, ``|group g| / n``."""
    group_of = np.asarray(group_of, dtype=np.int64)
    if group_of.size == 0:
        raise InvalidGroupError("no points")
    if f is None:
        f = int(group_of.max()) + 1
    if group_of.min() < 0 or group_of.max() >= f:
        raise InvalidGroupError(f"group index out of range [0, {f})")
    counts = np.bincount(group_of, minlength=f)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise InvalidGroupError(f"groups {empty.tolist()} have no members")
    return counts / group_of.size


@dataclass(frozen=True, eq=False)
class GroupAssignment:
    """Partition of the points into ``f`` protected groups plus ideal proportions.

    ``ideal`` defaults to the empirical group shares. A custom ``ideal`` (for
    example ``1/f`` for every group) may be passed; every entry must be positive.
    """

    group_of: np.ndarray
    f: int = 0
    group_names: tuple[str, ...] = ()
    ideal: np.ndarray | None = None

    def __post_init__(self):
        g = np.asarray(self.group_of, dtype=np.int64)
        if g.ndim != 1 or g.size == 0:
            raise InvalidGroupError("group_of must be a non-empty 1-D sequence")
        f = self.f or int(g.max()) + 1
        derived = derive_ideal_proportions(g, f)
        names = tuple(self.group_names) or tuple(str(i) for i in range(f))
        if len(names) != f:
            raise InvalidGroupError(f"{len(names)} group names for {f} groups")
        ideal = derived if self.ideal is None else np.asarray(self.ideal, dtype=np.float64)
        if ideal.shape != (f,):
            raise InvalidGroupError(f"ideal must have {f} entries")
        if np.any(ideal <= 0) or np.any(ideal > 1) or not np.all(np.isfinite(ideal)):
            raise InvalidGroupError("ideal proportions must lie in (0, 1]")
        object.__setattr__(self, "group_of", _frozen(g))
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "group_names", names)
        object.__setattr__(self, "ideal", _frozen(ideal))

    @classmethod
    def from_labels(cls, labels: Iterable) -> "GroupAssignment":
        """Encode arbitrary labels as group indices in first-appearance order."""
        index: dict = {}
        codes = [index.setdefault(lab, len(index)) for lab in labels]
        return cls(np.array(codes), len(index), tuple(str(k) for k in index))

    @property
    def n(self) -> int:
        return self.group_of.size

    def one_hot(self) -> np.ndarray:
        """The ``n x f`` membership matrix."""
        out = np.zeros((self.n, self.f))
        out[np.arange(self.n), self.group_of] = 1.0
        return out

    def take(self, rows: Sequence[int]) -> "GroupAssignment":
        """Restrict to ``rows``; ideal proportions are re-derived from the subset."""
        sub = self.group_of[list(rows)]
        return GroupAssignment(sub, self.f, self.group_names)


class Merge(NamedTuple):
    left: int
    right: int
    distance: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Merge list of a (possibly partial) agglomerative clustering.

    Node ids ``0..n-1`` are leaves; merge ``i`` creates node ``n + i``.
    """

    n_leaves: int
    merges: tuple[Merge, ...] = ()

    def __post_init__(self):
        n = int(self.n_leaves)
        merges = tuple(Merge(int(a), int(b), float(d), int(s)) for a, b, d, s in self.merges)
        if n < 1:
            raise FairHACError("a dendrogram needs at least one leaf")
        if len(merges) > n - 1:
            raise FairHACError(f"{len(merges)} merges for {n} leaves")
        sizes = [1] * n
        used = set()
        for i, (a, b, d, s) in enumerate(merges):
            node = n + i
            for child in (a, b):
                if not 0 <= child < node:
                    raise FairHACError(f"merge {i} references unknown node {child}")
                if child in used:
                    raise FairHACError(f"node {child} merged twice")
                used.add(child)
            if a == b:
                raise FairHACError(f"merge {i} joins node {a} with itself")
            if not (d >= 0 and np.isfinite(d)):
                raise FairHACError(f"merge {i} has invalid distance {d}")
            if s != sizes[a] + sizes[b]:
                raise FairHACError(f"merge {i} size {s} != {sizes[a]} + {sizes[b]}")
            sizes.append(s)
        object.__setattr__(self, "n_leaves", n)
        object.__setattr__(self, "merges", merges)

    @property
    def complete(self) -> bool:
        return len(self.merges) == self.n_leaves - 1

    @property
    def n_nodes(self) -> int:
        return self.n_leaves + len(self.merges)

    def children(self, node: int) -> tuple[int, int] | None:
        if node < self.n_leaves:
            return None
        m = self.merges[node - self.n_leaves]
        return m.left, m.right

    def size(self, node: int) -> int:
        return 1 if node < self.n_leaves else self.merges[node - self.n_leaves].size

    def leaves(self, node: int) -> list[int]:
        """Leaf ids under ``node`` in left-to-right order."""
        out, stack = [], [node]
        while stack:
            v = stack.pop()
            if v < self.n_leaves:
                out.append(v)
            else:
                m = self.merges[v - self.n_leaves]
                stack.append(m.right)
                stack.append(m.left)
        return out

    def roots(self, n_merges: int | None = None) -> list[int]:
        """Nodes without a parent after the first ``n_merges`` merges, ascending."""
        n_merges = len(self.merges) if n_merges is None else n_merges
        consumed = set()
        for m in self.merges[:n_merges]:
            consumed.update((m.left, m.right))
        return [v for v in range(self.n_leaves + n_merges) if v not in consumed]

    def to_dict(self) -> dict:
        return {
            "n_leaves": self.n_leaves,
            "complete": self.complete,
            "merges": [
                {"left": m.left, "right": m.right, "distance": m.distance, "size": m.size}
                for m in self.merges
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Dendrogram":
        try:
            tree = cls(
                data["n_leaves"],
                tuple((m["left"], m["right"], m["distance"], m["size"]) for m in data["merges"]),
            )
        except (KeyError, TypeError) as exc:
            raise FairHACError(f"malformed dendrogram JSON: {exc}") from exc
        if "complete" in data and bool(data["complete"]) != tree.complete:
            raise FairHACError("'complete' flag disagrees with merge count")
        return tree

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Dendrogram":
        return cls.from_dict(json.loads(text))

    def to_linkage_matrix(self) -> np.ndarray:
        """``(n-1) x 4`` array in the layout used by ``scipy.cluster.hierarchy``."""
        return np.array([[m.left, m.right, m.distance, m.size] for m in self.merges], dtype=float).reshape(-1, 4)

    def to_newick(self, names: Sequence | None = None) -> str:
        """Newick string of a complete tree.

        Branch lengths are height differences, a leaf sitting at height 0 and an
        internal node at its merge distance.
        """
        if not self.complete:
            raise CutUnavailableError("Newick export needs a complete tree")
        n = self.n_leaves
        names = [str(i) for i in range(n)] if names is None else [str(x) for x in names]
        if n == 1:
            return f"{names[0]};"
        height = lambda v: 0.0 if v < n else self.merges[v - n].distance  # noqa: E731
        text: dict[int, str] = {i: names[i] for i in range(n)}
        for i, m in enumerate(self.merges):
            d = m.distance
            text[n + i] = "({}:{!r},{}:{!r})".format(
                text.pop(m.left), d - height(m.left), text.pop(m.right), d - height(m.right)
            )
        return text[n + len(self.merges) - 1] + ";"


@dataclass(frozen=True, eq=False)
class Clustering:
    """Flat partition: ``assignment[i]`` is the cluster index of point ``i``."""

    assignment: np.ndarray
    k: int = field(default=0)

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 1 or a.size == 0:
            raise FairHACError("assignment must be a non-empty 1-D sequence")
        k = self.k or int(a.max()) + 1
        if a.min() < 0 or a.max() >= k:
            raise FairHACError(f"cluster index out of range [0, {k})")
        if np.unique(a).size != k:
            raise FairHACError("every cluster index must be used")
        object.__setattr__(self, "assignment", _frozen(a))
        object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return self.assignment.size

    def members(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.assignment == c) for c in range(self.k)]

    def __eq__(self, other):
        return isinstance(other, Clustering) and np.array_equal(self.assignment, other.assignment)

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]], n: int | None = None) -> "Clustering":
        sets = [sorted(s) for s in sets]
        n = n if n is not None else sum(len(s) for s in sets)
        raw = np.full(n, -1)
        for c, s in enumerate(sets):
            raw[s] = c
        if np.any(raw < 0):
            raise FairHACError("sets do not cover every point")
        return canonical(raw)


def canonical(labels: Sequence[int]) -> Clustering:
    """Relabel clusters by ascending smallest member id."""
    labels = np.asarray(labels)
    mapping: dict[int, int] = {}
    out = np.empty(labels.size, dtype=np.int64)
    for i, lab in enumerate(labels.tolist()):
        out[i] = mapping.setdefault(lab, len(mapping))
    return Clustering(out, len(mapping))


def cut(tree: Dendrogram, k: int) -> Clustering:
    """The partition after applying exactly the first ``n_leaves - k`` merges."""
    n = tree.n_leaves
    if not 1 <= k <= n:
        raise CutUnavailableError(f"k={k} outside [1, {n}]")
    steps = n - k
    if steps > len(tree.merges):
        raise CutUnavailableError(f"cut at k={k} needs {steps} merges, tree has {len(tree.merges)}")
    parent = list(range(n + steps))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, m in enumerate(tree.merges[:steps]):
        node = n + i
        parent[find(m.left)] = node
        parent[find(m.right)] = node
    return canonical([find(i) for i in range(n)])
