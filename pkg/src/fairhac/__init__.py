"""Fair hierarchical agglomerative clustering: FHAC, FP-HAC and proportional-fairness metrics."""

from .core import (
    Clustering,
    CutUnavailableError,
    Dataset,
    Dendrogram,
    FairHACError,
    GroupAssignment,
    InvalidGroupError,
    Merge,
    UndefinedScoreError,
    cut,
    derive_ideal_proportions,
)
from .fhac import DEGENERATE_ALPHA, DEGENERATE_BETA, FHACResult, Schedule, fhac
from .fphac import FPHACResult, fp_hac
from .hac import vanilla_hac
from .metrics import FairnessReport, balance, fairness_report, group_proportions, mfc, silhouette
from .tuning import TuningGrid, grid_search

__all__ = [
    "Clustering",
    "CutUnavailableError",
    "DEGENERATE_ALPHA",
    "DEGENERATE_BETA",
    "Dataset",
    "Dendrogram",
    "FHACResult",
    "FPHACResult",
    "FairHACError",
    "FairnessReport",
    "GroupAssignment",
    "InvalidGroupError",
    "Merge",
    "Schedule",
    "TuningGrid",
    "UndefinedScoreError",
    "balance",
    "cut",
    "derive_ideal_proportions",
    "fairness_report",
    "fhac",
    "fp_hac",
    "grid_search",
    "group_proportions",
    "mfc",
    "silhouette",
    "vanilla_hac",
]
