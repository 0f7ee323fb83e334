"""Proportional-fairness metrics and the silhouette score."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Clustering, FairHACError, GroupAssignment, InvalidGroupError, UndefinedScoreError


def _check(clustering: Clustering, groups: GroupAssignment) -> None:
    if clustering.n != groups.n:
        raise FairHACError(f"clustering has {clustering.n} points, groups have {groups.n}")


def group_counts(clustering: Clustering, groups: GroupAssignment) -> np.ndarray:
    """``k x f`` member counts."""
    _check(clustering, groups)
    counts = np.zeros((clustering.k, groups.f), dtype=np.int64)
    np.add.at(counts, (clustering.assignment, groups.group_of), 1)
    return counts


def group_proportions(clustering: Clustering, groups: GroupAssignment) -> np.ndarray:
    """``delta[i, g]``: fraction of cluster ``i`` belonging to group ``g``."""
    counts = group_counts(clustering, groups)
    return counts / counts.sum(axis=1, keepdims=True)


def is_alpha_fair(cluster_row, ideal, alpha: float) -> np.ndarray:
    row = np.asarray(cluster_row, dtype=np.float64)
    ideal = np.asarray(ideal, dtype=np.float64)
    if row.shape != ideal.shape:
        raise FairHACError("proportion and ideal vectors differ in length")
    return np.abs(row - ideal) <= alpha


def cluster_costs(delta: np.ndarray, ideal: np.ndarray) -> np.ndarray:
    """Per-cluster summed deviation from the ideal proportions."""
    dev = np.abs(np.asarray(delta) - np.asarray(ideal))
    out = np.zeros(dev.shape[0])
    for g in range(dev.shape[1]):
        out += dev[:, g]
    return out


def cluster_balances(delta: np.ndarray, ideal: np.ndarray) -> np.ndarray:
    """Per-cluster ``min_g min(delta/phi, phi/delta)``; zero when a group is absent."""
    delta = np.asarray(delta, dtype=np.float64)
    ideal = np.asarray(ideal, dtype=np.float64)
    if np.any(ideal <= 0):
        raise InvalidGroupError("balance needs every ideal proportion to be positive")
    with np.errstate(divide="ignore"):
        ratio = np.where(delta > 0, np.minimum(delta / ideal, ideal / np.where(delta > 0, delta, 1.0)), 0.0)
    return ratio.min(axis=1)


def mfc(clustering: Clustering, groups: GroupAssignment) -> float:
    """Max fairness cost: the worst cluster's summed deviation from the ideal proportions."""
    return float(cluster_costs(group_proportions(clustering, groups), groups.ideal).max())


def balance(clustering: Clustering, groups: GroupAssignment) -> float:
    return float(cluster_balances(group_proportions(clustering, groups), groups.ideal).min())


def silhouette_samples(clustering: Clustering, distances: np.ndarray) -> np.ndarray:
    labels = clustering.assignment
    d = np.asarray(distances, dtype=np.float64)
    if d.shape != (clustering.n, clustering.n):
        raise FairHACError(f"distance matrix shape {d.shape} does not match {clustering.n} points")
    onehot = np.zeros((clustering.n, clustering.k))
    onehot[np.arange(clustering.n), labels] = 1.0
    sizes = onehot.sum(axis=0)
    sums = d @ onehot  # total distance from each point to each cluster
    own = sizes[labels]
    a = sums[np.arange(clustering.n), labels] / np.maximum(own - 1, 1)
    mean_other = sums / sizes
    mean_other[np.arange(clustering.n), labels] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    s[own == 1] = 0.0
    return s


def silhouette(clustering: Clustering, distances: np.ndarray) -> float:
    """Mean silhouette over all points; singleton members contribute 0."""
    if clustering.k < 2 or clustering.n < 2:
        raise UndefinedScoreError("silhouette needs at least two clusters")
    return float(silhouette_samples(clustering, distances).mean())


@dataclass(frozen=True, eq=False)
class FairnessReport:
    delta: np.ndarray
    mfc: float
    balance: float
    per_cluster_cost: np.ndarray
    silhouette: float | None = None

    @property
    def k(self) -> int:
        return self.delta.shape[0]

    def to_dict(self) -> dict:
        return {
            "k": int(self.delta.shape[0]),
            "f": int(self.delta.shape[1]),
            "delta": self.delta.tolist(),
            "mfc": self.mfc,
            "balance": self.balance,
            "per_cluster_cost": self.per_cluster_cost.tolist(),
            "silhouette": self.silhouette,
        }


def fairness_report(
    clustering: Clustering, groups: GroupAssignment, distances: np.ndarray | None = None
) -> FairnessReport:
    """All fairness metrics for ``clustering``; silhouette only if distances are given and k >= 2."""
    delta = group_proportions(clustering, groups)
    costs = cluster_costs(delta, groups.ideal)
    sil = None
    if distances is not None and clustering.k >= 2:
        sil = silhouette(clustering, distances)
    return FairnessReport(
        delta=delta,
        mfc=float(costs.max()),
        balance=float(cluster_balances(delta, groups.ideal).min()),
        per_cluster_cost=costs,
        silhouette=sil,
    )
