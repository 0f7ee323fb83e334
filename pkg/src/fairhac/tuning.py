"""Grid search over FHAC schedule parameters or the FP-HAC epsilon."""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, FairHACError, GroupAssignment
from .fhac import DEGENERATE_ALPHA, DEGENERATE_BETA, MODES, SCHEDULE_KINDS, Schedule, fhac
from .fphac import fp_hac
from .hac import vanilla_hac
from .linkage import check_criterion, pairwise_distances
from .metrics import FairnessReport

DEGENERATE_CONFIG = {
    "mode": "normalized", "schedule": "degenerate", "theta1": 0.0, "theta2": 0.0, "alpha0": math.inf, "beta0": 0.0,
}


@dataclass(frozen=True)
class TuningGrid:
    """Parameter lists searched exhaustively.

    FHAC evaluates the product of the four schedule lists and the selection
    ``modes``; FP-HAC evaluates ``epsilon_values``. ``include_degenerate`` adds
    the unconstrained FHAC configuration (alpha = inf, beta = 0), which
    reproduces vanilla HAC.
    """

    theta1_values: tuple[float, ...] = (0.0005, 0.005, 0.05)
    theta2_values: tuple[float, ...] = (0.001, 0.01, 0.1, 0.65)
    alpha0_values: tuple[float, ...] = (0.0, -1.5, -3.0)
    beta0_values: tuple[float, ...] = (0.0, 3.0)
    epsilon_values: tuple[float, ...] = (0.0, 1.0, 10.0, math.inf)
    modes: tuple[str, ...] = ("normalized", "paper-literal")
    include_degenerate: bool = True
    schedule_kind: str = "exponential"

    def __post_init__(self):
        for name in ("theta1_values", "theta2_values", "alpha0_values", "beta0_values", "epsilon_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise FairHACError(f"{name} is empty")
            object.__setattr__(self, name, vals)
        modes = tuple(self.modes)
        if not modes or any(m not in MODES for m in modes):
            raise FairHACError(f"modes must be a non-empty subset of {MODES}")
        object.__setattr__(self, "modes", modes)
        if self.schedule_kind not in SCHEDULE_KINDS:
            raise FairHACError(f"unknown schedule kind {self.schedule_kind!r}")

    def fhac_configs(self) -> list[dict]:
        out = [
            {"mode": mode, "schedule": self.schedule_kind, "theta1": t1, "theta2": t2, "alpha0": a0, "beta0": b0}
            for mode, t1, t2, a0, b0 in itertools.product(
                self.modes, self.theta1_values, self.theta2_values, self.alpha0_values, self.beta0_values
            )
        ]
        if self.include_degenerate:
            out.append(dict(DEGENERATE_CONFIG))
        return out

    def fphac_configs(self) -> list[dict]:
        return [{"epsilon": e} for e in self.epsilon_values]


def schedules_for(config: dict) -> tuple[Schedule, Schedule]:
    if config["schedule"] == "degenerate":
        return DEGENERATE_ALPHA, DEGENERATE_BETA
    kind = config["schedule"]
    if kind == "constant":
        return Schedule.constant(config["alpha0"]), Schedule.constant(config["beta0"])
    return Schedule(kind, config["theta1"], config["alpha0"]), Schedule(kind, config["theta2"], config["beta0"])


def _param_key(config: dict) -> tuple:
    numeric = tuple((k, config[k]) for k in sorted(config) if k not in ("schedule", "mode"))
    return numeric + tuple((k, config[k]) for k in ("mode", "schedule") if k in config)


@dataclass
class TuningResult:
    best_params: dict
    best_report: FairnessReport
    table: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        if not self.table:
            return ""
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(self.table[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.table)
        return buf.getvalue()


def _rank(objective: str, report: FairnessReport, config: dict) -> tuple:
    value = report.mfc if objective == "mfc" else -report.balance
    sil = report.silhouette
    return (value, -(sil if sil is not None else -math.inf), _param_key(config))


def grid_search(
    dataset: Dataset,
    groups: GroupAssignment,
    k: int,
    criterion: str,
    grid: TuningGrid,
    objective: str = "mfc",
    algorithm: str = "fhac",
    *,
    base: np.ndarray | None = None,
    workers: int = 1,
) -> TuningResult:
    """Evaluate every grid configuration and return the best one.

    Ranking: objective first (lower MFC or higher balance), then higher
    silhouette, then the smallest parameter tuple, so the winner does not depend
    on enumeration order.
    """
    check_criterion(criterion)
    if objective not in ("mfc", "balance"):
        raise FairHACError(f"unknown objective {objective!r}")
    if base is None:
        base = pairwise_distances(dataset.points)

    if algorithm == "fhac":
        configs = grid.fhac_configs()

        def run(config):
            za, zb = schedules_for(config)
            return fhac(dataset, groups, k, criterion, za, zb, config["mode"], base=base).report

    elif algorithm == "fphac":
        configs = grid.fphac_configs()
        tree = vanilla_hac(dataset, criterion, base=base)

        def run(config):
            return fp_hac(tree, k, groups, config["epsilon"], criterion, objective, base=base).report

    else:
        raise FairHACError(f"unknown algorithm {algorithm!r}")
    if not configs:
        raise FairHACError("empty grid")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, configs))
    else:
        reports = [run(c) for c in configs]

    table = [
        {**config, "mfc": rep.mfc, "balance": rep.balance, "silhouette": rep.silhouette}
        for config, rep in zip(configs, reports)
    ]
    best = min(range(len(configs)), key=lambda i: _rank(objective, reports[i], configs[i]))
    return TuningResult(dict(configs[best]), reports[best], table)
