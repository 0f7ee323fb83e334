"""Greedy agglomerative clustering without fairness constraints."""

from __future__ import annotations

import numpy as np

from .core import Dataset, Dendrogram, FairHACError, Merge
from .linkage import DistanceMatrix, pairwise_distances


def closest_pair(matrix: DistanceMatrix) -> tuple[int, int, float]:
    """Minimum-distance live pair; ties go to the lexicographically smallest ``(older, younger)`` ids."""
    ids, sub = matrix.submatrix()
    sub[np.tril_indices(ids.size)] = np.inf
    # row-major argmin over ascending ids returns the lexicographically first minimum
    flat = int(np.argmin(sub))
    r, c = divmod(flat, ids.size)
    return int(ids[r]), int(ids[c]), float(sub[r, c])


def agglomerate(matrix: DistanceMatrix, merges: list[Merge], k_stop: int) -> None:
    """Append unconstrained closest-pair merges to ``merges`` until ``k_stop`` clusters remain."""
    while matrix.size > k_stop:
        a, b, d = closest_pair(matrix)
        merges.append(Merge(a, b, d, int(matrix.sizes[a] + matrix.sizes[b])))
        matrix.merge(a, b)


def vanilla_hac(
    dataset: Dataset,
    criterion: str,
    k_stop: int = 1,
    *,
    base: np.ndarray | None = None,
    exhaustive: bool = False,
) -> Dendrogram:
    """Build the HAC merge list, stopping once ``k_stop`` clusters remain.

    ``base`` may supply precomputed pairwise distances to avoid recomputation.
    """
    n = dataset.n
    if not 1 <= k_stop <= n:
        raise FairHACError(f"k_stop={k_stop} outside [1, {n}]")
    if base is None:
        base = pairwise_distances(dataset.points)
    matrix = DistanceMatrix(base, criterion, exhaustive=exhaustive)
    merges: list[Merge] = []
    agglomerate(matrix, merges, k_stop)
    return Dendrogram(n, tuple(merges))
