"""Fairness-constrained agglomerative clustering (FHAC).

Each round merges a pair chosen by :func:`select_merge` under a fairness bound
``alpha`` that tightens as the clustering approaches ``k`` clusters and a
distance slack ``beta`` that loosens as merges accumulate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, Dendrogram, FairHACError, GroupAssignment, Merge, cut
from .hac import agglomerate
from .linkage import DistanceMatrix, check_criterion, pairwise_distances
from .metrics import FairnessReport, fairness_report

MODES = ("normalized", "paper-literal")
SCHEDULE_KINDS = ("exponential", "linear", "constant")


@dataclass(frozen=True)
class Schedule:
    """Monotone non-decreasing bound as a function of a progress counter.

    exponential: ``exp(theta * x + offset)``; linear: ``max(theta * x + offset, 0)``;
    constant: ``offset`` (``math.inf`` is allowed).
    """

    kind: str = "exponential"
    theta: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise FairHACError(f"unknown schedule kind {self.kind!r}")
        if self.kind != "constant" and (self.theta < 0 or not math.isfinite(self.theta)):
            raise FairHACError("schedule rate must be finite and non-negative")
        if math.isnan(self.offset) or (self.kind == "constant" and self.offset < 0):
            raise FairHACError(f"invalid schedule offset {self.offset}")

    @classmethod
    def constant(cls, value: float) -> "Schedule":
        return cls("constant", 0.0, value)

    def __call__(self, x: float) -> float:
        if x < 0:
            raise FairHACError("progress counter must be non-negative")
        if self.kind == "exponential":
            try:
                return math.exp(self.theta * x + self.offset)
            except OverflowError:
                return math.inf
        if self.kind == "linear":
            return max(self.theta * x + self.offset, 0.0)
        return self.offset


def schedule_eval(s: Schedule, x: float) -> float:
    return s(x)


#: alpha = inf, beta = 0: constraints vanish and the selection is plain closest-pair.
DEGENERATE_ALPHA = Schedule.constant(math.inf)
DEGENERATE_BETA = Schedule.constant(0.0)


def merged_proportion(delta_i, size_i, delta_j, size_j):
    """Group proportion of the union of two clusters (works elementwise on arrays)."""
    return (delta_i * size_i + delta_j * size_j) / (size_i + size_j)


@dataclass(frozen=True)
class MergeDecision:
    pair: tuple[int, int]
    distance: float
    fair_count: int
    per_group_flags: tuple[bool, ...]


@dataclass
class _State:
    """Live clusters of an FHAC run: distances plus incrementally merged proportions."""

    matrix: DistanceMatrix
    delta: np.ndarray  # (2n-1) x f, row per node id
    ideal: np.ndarray
    evaluations: int = 0

    def merge(self, a: int, b: int) -> int:
        sa, sb = self.matrix.sizes[a], self.matrix.sizes[b]
        new = self.matrix.merge(a, b)
        self.delta[new] = merged_proportion(self.delta[a], sa, self.delta[b], sb)
        return new


def _pairs(ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r, c = np.triu_indices(ids.size, 1)
    return ids[r], ids[c]


def _flags(state: _State, a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    sizes = state.matrix.sizes
    sa = sizes[a][:, None]
    sb = sizes[b][:, None]
    merged = merged_proportion(state.delta[a], sa, state.delta[b], sb)
    state.evaluations += a.size * state.ideal.size
    return np.abs(merged - state.ideal) <= alpha


def _select_normalized(state: _State, alpha: float, beta: float) -> MergeDecision:
    a, b = _pairs(state.matrix.active_ids())
    d = state.matrix.entries[a, b]
    band = np.flatnonzero(d <= d.min() + beta)
    a, b, d = a[band], b[band], d[band]
    flags = _flags(state, a, b, alpha)
    count = flags.sum(axis=1)
    best = count == count.max()
    best &= d == d[best].min()
    i = int(np.flatnonzero(best)[0])  # pairs are in lexicographic order
    return MergeDecision((int(a[i]), int(b[i])), float(d[i]), int(count[i]), tuple(bool(x) for x in flags[i]))


def _literal_scan_py(count, d, beta):
    d_min, best_count, best = math.inf, 0, -1
    for i in range(count.shape[0]):
        if count[i] >= best_count and d_min + beta > d[i]:
            d_min, best_count, best = d[i], count[i], i
    return best


try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is optional
    _literal_scan = _literal_scan_py
else:
    _literal_scan = njit(cache=True, nogil=True)(_literal_scan_py)


def _select_literal(state: _State, alpha: float, beta: float) -> MergeDecision:
    ids = state.matrix.active_ids()
    m = ids.size
    r, c = np.nonzero(~np.eye(m, dtype=bool))  # ordered pairs, row-major
    a, b = ids[r], ids[c]
    d = state.matrix.entries[a, b]
    flags = _flags(state, a, b, alpha)
    count = flags.sum(axis=1)
    best = _literal_scan(count.astype(np.int64), d, float(beta))
    if best < 0:
        raise FairHACError("no admissible merge (non-finite distances?)")
    pair = (int(min(a[best], b[best])), int(max(a[best], b[best])))
    return MergeDecision(pair, float(d[best]), int(count[best]), tuple(bool(x) for x in flags[best]))


def select_merge(state: _State, alpha: float, beta: float, mode: str = "normalized") -> MergeDecision:
    """Choose the next pair to merge.

    ``normalized``: among pairs within ``beta`` of the closest distance, take the
    one satisfying the fairness bound for the most groups, then the nearest, then
    the lexicographically first. ``paper-literal``: a single ordered scan that
    replaces the incumbent whenever a pair is at least as fair and closer than
    the incumbent distance plus ``beta``.
    """
    if state.matrix.size < 2:
        raise FairHACError("need at least two clusters to merge")
    if mode == "normalized":
        return _select_normalized(state, alpha, beta)
    if mode == "paper-literal":
        return _select_literal(state, alpha, beta)
    raise FairHACError(f"unknown selection mode {mode!r}")


def new_state(dataset_or_base, groups: GroupAssignment, criterion: str) -> _State:
    base = dataset_or_base
    if isinstance(base, Dataset):
        base = pairwise_distances(base.points)
    n = base.shape[0]
    if groups.n != n:
        raise FairHACError(f"groups cover {groups.n} points, dataset has {n}")
    delta = np.zeros((max(2 * n - 1, 1), groups.f))
    delta[:n] = groups.one_hot()
    return _State(DistanceMatrix(base, criterion), delta, np.asarray(groups.ideal))


@dataclass
class FHACResult:
    tree: Dendrogram
    report: FairnessReport
    all_constraints_met: bool
    decisions: list[MergeDecision] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)
    betas: list[float] = field(default_factory=list)
    evaluations: int = 0
    final_delta: dict[int, np.ndarray] = field(default_factory=dict)  # node id -> merged proportions at k


def fhac(
    dataset: Dataset,
    groups: GroupAssignment,
    k: int,
    criterion: str,
    z_alpha: Schedule,
    z_beta: Schedule,
    mode: str = "normalized",
    complete_tree: bool = False,
    *,
    base: np.ndarray | None = None,
) -> FHACResult:
    """Run FHAC down to ``k`` clusters.

    With ``complete_tree`` the remaining ``k - 1`` merges are appended as plain
    closest-pair merges so the result is a single-rooted tree. The report always
    describes the ``k``-cluster level.
    """
    check_criterion(criterion)
    n = dataset.n
    if not 1 <= k <= n:
        raise FairHACError(f"k={k} outside [1, {n}]")
    if mode not in MODES:
        raise FairHACError(f"unknown selection mode {mode!r}")
    if base is None:
        base = pairwise_distances(dataset.points)
    state = new_state(base, groups, criterion)
    result = FHACResult(tree=None, report=None, all_constraints_met=False)  # type: ignore[arg-type]
    merges: list[Merge] = []
    while state.matrix.size > k:
        live = state.matrix.size
        alpha = z_alpha(live - k)
        beta = z_beta(n - live)
        dec = select_merge(state, alpha, beta, mode)
        a, b = dec.pair
        merges.append(Merge(a, b, dec.distance, int(state.matrix.sizes[a] + state.matrix.sizes[b])))
        state.merge(a, b)
        result.decisions.append(dec)
        result.alphas.append(alpha)
        result.betas.append(beta)
    result.final_delta = {int(v): state.delta[v].copy() for v in state.matrix.active_ids()}
    if complete_tree:
        agglomerate(state.matrix, merges, 1)
    result.tree = Dendrogram(n, tuple(merges))
    result.evaluations = state.evaluations
    result.report = fairness_report(cut(result.tree, k), groups, base)

    alpha0 = z_alpha(0)
    dev = np.abs(result.report.delta - groups.ideal)
    result.all_constraints_met = bool(np.all(dev <= alpha0))
    if result.all_constraints_met:
        bound = groups.f * alpha0
        assert result.report.mfc <= bound * (1 + 1e-12) + 1e-12, (result.report.mfc, bound)
    return result
