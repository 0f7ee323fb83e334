"""Post-hoc fairness repair of an existing dendrogram (FP-HAC).

Starting from the ``k``-cluster level, subtrees of equal leaf count are swapped
between the ``k`` clusters whenever the swap makes both affected clusters
fairer, keeps the sibling linkage distances within ``epsilon`` and strictly
improves the ``k``-level objective. The frontier then descends one level and
the scan repeats until only leaves remain.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .core import CutUnavailableError, Dataset, Dendrogram, FairHACError, GroupAssignment, Merge, cut
from .linkage import check_criterion, linkage_distance, pairwise_distances
from .metrics import FairnessReport, cluster_balances, fairness_report

OBJECTIVES = ("mfc", "balance")
_DIGITS = 12  # objective keys are rounded so summation noise never counts as an improvement


@dataclass(frozen=True)
class LevelFrontier:
    """Frontier nodes at depth ``level``, one cell per ``k``-level cluster."""

    level: int
    cells: tuple[tuple[int, ...], ...]

    @property
    def nodes(self) -> list[int]:
        return [v for cell in self.cells for v in cell]


@dataclass(frozen=True)
class SwapCandidate:
    x: int
    y: int
    cell_x: int
    cell_y: int
    # (original flags, swapped flags) for the cluster of x and the cluster of y
    flags_x: tuple[tuple[bool, ...], tuple[bool, ...]]
    flags_y: tuple[tuple[bool, ...], tuple[bool, ...]]
    fairness_ok: bool
    objective_ok: bool
    distance_ok: bool

    @property
    def accepted(self) -> bool:
        return self.fairness_ok and self.objective_ok and self.distance_ok


def k_roots(tree: Dendrogram, k: int) -> list[int]:
    """Roots of the ``k`` clusters, ordered like the clusters of ``cut(tree, k)``."""
    n = tree.n_leaves
    if not 1 <= k <= n:
        raise CutUnavailableError(f"k={k} outside [1, {n}]")
    if n - k > len(tree.merges):
        raise CutUnavailableError(f"tree has {len(tree.merges)} merges, level k={k} needs {n - k}")
    roots = tree.roots(n - k)
    return sorted(roots, key=lambda v: min(tree.leaves(v)))


def build_frontier(tree: Dendrogram, k: int) -> LevelFrontier:
    level = int(math.floor(math.log2(k)))
    return LevelFrontier(level, tuple((r,) for r in k_roots(tree, k)))


def expand_frontier(fr: LevelFrontier, tree) -> LevelFrontier:
    """Replace every internal frontier node by its two children; leaves stay.

    ``tree`` is anything with a ``children(node)`` method returning ``None`` for leaves.
    """
    cells = []
    for cell in fr.cells:
        out = []
        for v in cell:
            ch = tree.children(v)
            out.extend(ch if ch else (v,))
        cells.append(tuple(sorted(out)))
    return LevelFrontier(fr.level + 1, tuple(cells))


class _WorkTree:
    """Mutable copy of a dendrogram supporting subtree exchange between clusters."""

    def __init__(self, tree: Dendrogram, k: int, groups: GroupAssignment, base: np.ndarray,
                 criterion: str, epsilon: float, objective: str, paper_literal: bool):
        n = tree.n_leaves
        self.n = n
        self.tree = tree
        self.base = base
        self.criterion = criterion
        self.epsilon = epsilon
        self.objective = objective
        self.paper_literal = paper_literal
        self.ideal = np.asarray(groups.ideal)
        self.kids: dict[int, list[int]] = {}
        self.parent: dict[int, int] = {}
        self.count = np.zeros((tree.n_nodes, groups.f), dtype=np.int64)
        self.count[np.arange(n), groups.group_of] = 1
        self.size = np.ones(tree.n_nodes, dtype=np.int64)
        for i, m in enumerate(tree.merges):
            v = n + i
            self.kids[v] = [m.left, m.right]
            self.parent[m.left] = v
            self.parent[m.right] = v
            self.count[v] = self.count[m.left] + self.count[m.right]
            self.size[v] = m.size
        self.version = np.zeros(tree.n_nodes, dtype=np.int64)
        self._leaf_memo: dict[tuple[int, int], np.ndarray] = {}
        self._dist_memo: dict[tuple, float] = {}

        self.roots = k_roots(tree, k)
        self.root_set = set(self.roots)
        self.cell_count = self.count[self.roots].copy()
        self.cell_size = self.size[self.roots].copy()
        self.delta = self.cell_count / self.cell_size[:, None]
        self.costs = np.abs(self.delta - self.ideal).sum(axis=1)
        self.balances = cluster_balances(self.delta, self.ideal)
        self.evaluations = 0
        self.swaps: list[tuple[int, int, int]] = []

    def children(self, v: int):
        return self.kids.get(v)

    # -- distances -----------------------------------------------------

    def leaves(self, v: int) -> np.ndarray:
        key = (v, int(self.version[v]))
        got = self._leaf_memo.get(key)
        if got is None:
            out, stack = [], [v]
            while stack:
                u = stack.pop()
                if u < self.n:
                    out.append(u)
                else:
                    stack.extend(self.kids[u])
            got = self._leaf_memo[key] = np.array(out, dtype=np.int64)
        return got

    def distance(self, a: int, b: int) -> float:
        key = (a, int(self.version[a]), b, int(self.version[b]))
        got = self._dist_memo.get(key)
        if got is None:
            got = self._dist_memo[key] = linkage_distance(self.leaves(a), self.leaves(b), self.criterion, self.base)
        return got

    def sibling(self, v: int) -> int | None:
        if v in self.root_set or v not in self.parent:
            return None
        a, b = self.kids[self.parent[v]]
        return b if a == v else a

    def _distance_ok(self, x: int, y: int) -> bool:
        if math.isinf(self.epsilon):
            return True
        for node, other in ((x, y), (y, x)):
            sib = self.sibling(node)
            if sib is None:
                continue
            if not abs(self.distance(sib, other) - self.distance(sib, node)) <= self.epsilon:
                return False
        return True

    # -- fairness ------------------------------------------------------

    def _key(self, costs: np.ndarray, balances: np.ndarray) -> tuple:
        leximax = tuple(sorted(np.round(costs, _DIGITS).tolist(), reverse=True))
        if self.objective == "mfc":
            return leximax
        return tuple((-np.sort(np.round(balances, _DIGITS))).tolist()), leximax

    def optimal(self) -> bool:
        return bool(np.all(np.round(self.costs, _DIGITS) == 0))

    def _flags(self, before: np.ndarray, after: np.ndarray):
        """Per-group (original wins, swapped wins) flags and whether the swap wins."""
        dev0 = np.abs(before - self.ideal)
        dev1 = np.abs(after - self.ideal)
        if self.paper_literal:
            keep = dev1 >= dev0
            swapped = ~keep
            return keep, swapped, keep.sum() <= swapped.sum()
        keep = dev1 > dev0
        swapped = dev1 < dev0
        return keep, swapped, swapped.sum() > keep.sum()

    def evaluate(self, ci: int, x: int, cj: int, y: int, check_distance: bool = True) -> SwapCandidate:
        if ci == cj:
            raise FairHACError("swap partners must belong to different clusters")
        if self.size[x] != self.size[y]:
            raise FairHACError(f"nodes {x} and {y} have different leaf counts")
        self.evaluations += self.ideal.size
        gx, gy = self.count[x], self.count[y]
        cnt_i = self.cell_count[ci] - gx + gy
        cnt_j = self.cell_count[cj] - gy + gx
        new_i = cnt_i / self.cell_size[ci]
        new_j = cnt_j / self.cell_size[cj]
        ki, si, wi = self._flags(self.delta[ci], new_i)
        kj, sj, wj = self._flags(self.delta[cj], new_j)
        fair = bool(wi and wj)

        objective_ok = False
        if fair:
            costs = self.costs.copy()
            bals = self.balances.copy()
            pair = np.vstack([new_i, new_j])
            costs[[ci, cj]] = np.abs(pair - self.ideal).sum(axis=1)
            bals[[ci, cj]] = cluster_balances(pair, self.ideal)
            objective_ok = self._key(costs, bals) < self._key(self.costs, self.balances)
        distance_ok = self._distance_ok(x, y) if (check_distance or fair and objective_ok) else False
        as_t = lambda a: tuple(bool(v) for v in a)  # noqa: E731
        return SwapCandidate(x, y, ci, cj, (as_t(ki), as_t(si)), (as_t(kj), as_t(sj)), fair, objective_ok, distance_ok)

    def apply(self, ci: int, x: int, cj: int, y: int, level: int) -> None:
        px, py = self.parent[x], self.parent[y]
        self.kids[px][self.kids[px].index(x)] = y
        self.kids[py][self.kids[py].index(y)] = x
        self.parent[x], self.parent[y] = py, px
        for start in (px, py):
            v = start
            while True:
                self.version[v] += 1
                if v not in self.parent:
                    break
                v = self.parent[v]
        gx, gy = self.count[x].copy(), self.count[y].copy()
        self.cell_count[ci] += gy - gx
        self.cell_count[cj] += gx - gy
        for c in (ci, cj):
            self.delta[c] = self.cell_count[c] / self.cell_size[c]
        self.costs[[ci, cj]] = np.abs(self.delta[[ci, cj]] - self.ideal).sum(axis=1)
        self.balances[[ci, cj]] = cluster_balances(self.delta[[ci, cj]], self.ideal)
        self.swaps.append((level, x, y))

    def scan(self, fr: LevelFrontier) -> LevelFrontier:
        """One pass over all cluster pairs and node pairs at this frontier."""
        cells = [list(c) for c in fr.cells]
        k = len(cells)
        for ci in range(k):
            for cj in range(ci + 1, k):
                for xi in range(len(cells[ci])):
                    for yj in range(len(cells[cj])):
                        x, y = cells[ci][xi], cells[cj][yj]
                        if self.size[x] != self.size[y]:
                            continue
                        cand = self.evaluate(ci, x, cj, y, check_distance=False)
                        if cand.accepted:
                            self.apply(ci, x, cj, y, fr.level)
                            cells[ci][xi], cells[cj][yj] = y, x
        return LevelFrontier(fr.level, tuple(tuple(sorted(c)) for c in cells))

    def rebuild(self) -> Dendrogram:
        """Emit the working tree as a merge list, keeping the original order where possible."""
        n = self.n
        pending = {v: sum(1 for c in kids if c >= n) for v, kids in self.kids.items()}
        heap = [v for v, p in pending.items() if p == 0]
        heapq.heapify(heap)
        new_id = {i: i for i in range(n)}
        merges = []
        while heap:
            v = heapq.heappop(heap)
            a, b = self.kids[v]
            if self.version[v]:
                dist = linkage_distance(self.leaves(a), self.leaves(b), self.criterion, self.base)
            else:
                dist = self.tree.merges[v - n].distance
            new_id[v] = n + len(merges)
            merges.append(Merge(new_id[a], new_id[b], dist, int(self.size[v])))
            p = self.parent.get(v)
            if p is not None:
                pending[p] -= 1
                if pending[p] == 0:
                    heapq.heappush(heap, p)
        return Dendrogram(n, tuple(merges))


@dataclass
class FPHACResult:
    tree: Dendrogram
    report: FairnessReport
    before: FairnessReport
    swaps: list[tuple[int, int, int]] = field(default_factory=list)  # (level, x, y), original node ids
    evaluations: int = 0
    levels: list[int] = field(default_factory=list)


def _setup(tree, groups, criterion, base, dataset):
    check_criterion(criterion)
    if base is None:
        if dataset is None:
            raise FairHACError("pass either the dataset or precomputed base distances")
        base = pairwise_distances(dataset.points)
    if base.shape[0] != tree.n_leaves or groups.n != tree.n_leaves:
        raise FairHACError(
            f"tree has {tree.n_leaves} leaves, distances cover {base.shape[0]}, groups cover {groups.n}"
        )
    return base


def evaluate_swap(
    x: int,
    y: int,
    fr: LevelFrontier,
    tree: Dendrogram,
    groups: GroupAssignment,
    epsilon: float,
    criterion: str,
    *,
    dataset: Dataset | None = None,
    base: np.ndarray | None = None,
    objective: str = "mfc",
    paper_literal: bool = False,
) -> SwapCandidate:
    """Evaluate exchanging frontier nodes ``x`` and ``y`` of ``tree`` without applying it."""
    base = _setup(tree, groups, criterion, base, dataset)
    cell_of = {v: i for i, cell in enumerate(fr.cells) for v in cell}
    if x not in cell_of or y not in cell_of:
        raise FairHACError("both nodes must be on the frontier")
    work = _WorkTree(tree, len(fr.cells), groups, base, criterion, epsilon, objective, paper_literal)
    return work.evaluate(cell_of[x], x, cell_of[y], y)


def fp_hac(
    tree: Dendrogram,
    k: int,
    groups: GroupAssignment,
    epsilon: float,
    criterion: str,
    objective: str = "mfc",
    *,
    dataset: Dataset | None = None,
    base: np.ndarray | None = None,
    paper_literal: bool = False,
) -> FPHACResult:
    """Repair ``tree`` for fairness at its ``k``-cluster level.

    The input may be complete or a ``k``-forest. The returned tree has the same
    leaves and cluster sizes at level ``k``; merge distances on rewritten paths
    are recomputed with ``criterion``.
    """
    if objective not in OBJECTIVES:
        raise FairHACError(f"unknown objective {objective!r}")
    if not epsilon >= 0:
        raise FairHACError("epsilon must be non-negative")
    base = _setup(tree, groups, criterion, base, dataset)
    before = fairness_report(cut(tree, k), groups, base)
    work = _WorkTree(tree, k, groups, base, criterion, float(epsilon), objective, paper_literal)
    fr = build_frontier(tree, k)
    levels = []
    while not work.optimal():
        levels.append(fr.level)
        fr = work.scan(fr)
        if all(v < tree.n_leaves for v in fr.nodes):
            break
        fr = expand_frontier(fr, work)
    out = work.rebuild() if work.swaps else tree
    report = fairness_report(cut(out, k), groups, base)
    return FPHACResult(out, report, before, work.swaps, work.evaluations, levels)
