import math
import random

import numpy as np
import pytest

from conftest import random_dataset
from fairhac.core import FairHACError, cut
from fairhac.hac import vanilla_hac
from fairhac.ingest import bundled_config
from fairhac.linkage import pairwise_distances
from fairhac.metrics import fairness_report
from fairhac.tuning import DEGENERATE_CONFIG, TuningGrid, grid_search

SMALL = dict(theta1_values=(0.001, 0.05), theta2_values=(0.01, 0.65), alpha0_values=(0.0, -2.0),
             beta0_values=(0.0,), modes=("normalized",))


@pytest.fixture(scope="module")
def instance():
    data, groups = random_dataset(np.random.default_rng(21), 30, 2, 2)
    return data, groups


def vanilla_report(data, groups, k, crit):
    base = pairwise_distances(data.points)
    return fairness_report(cut(vanilla_hac(data, crit), k), groups, base)


def test_row_count(instance):
    data, groups = instance
    grid = TuningGrid(**SMALL)
    res = grid_search(data, groups, 3, "average", grid)
    assert len(res.table) == 2 * 2 * 2 * 1 * 1 + 1
    assert res.table[-1]["schedule"] == "degenerate"
    no_deg = grid_search(data, groups, 3, "average", TuningGrid(**SMALL, include_degenerate=False))
    assert len(no_deg.table) == 8


def test_fphac_rows(instance):
    data, groups = instance
    res = grid_search(data, groups, 3, "single", TuningGrid(epsilon_values=(0.0, 1.0, math.inf)),
                      algorithm="fphac")
    assert [r["epsilon"] for r in res.table] == [0.0, 1.0, math.inf]


def test_degenerate_only_equals_vanilla(instance):
    data, groups = instance
    grid = TuningGrid(theta1_values=(0.0,), theta2_values=(0.0,), alpha0_values=(0.0,), beta0_values=(0.0,))
    # restrict to the degenerate configuration by filtering the produced table
    res = grid_search(data, groups, 3, "complete", grid)
    deg = [r for r in res.table if r["schedule"] == "degenerate"][0]
    van = vanilla_report(data, groups, 3, "complete")
    assert deg["mfc"] == van.mfc and deg["balance"] == van.balance and deg["silhouette"] == van.silhouette


@pytest.mark.parametrize("crit", ["single", "complete", "average"])
@pytest.mark.parametrize("objective", ["mfc", "balance"])
def test_never_worse_than_vanilla(instance, crit, objective):
    data, groups = instance
    res = grid_search(data, groups, 4, crit, TuningGrid(**SMALL), objective)
    van = vanilla_report(data, groups, 4, crit)
    if objective == "mfc":
        assert res.best_report.mfc <= van.mfc
    else:
        assert res.best_report.balance >= van.balance


def test_order_independent(instance):
    data, groups = instance
    a = grid_search(data, groups, 3, "single", TuningGrid(**SMALL))
    shuffled = {k: tuple(random.Random(4).sample(v, len(v))) for k, v in SMALL.items()}
    b = grid_search(data, groups, 3, "single", TuningGrid(**shuffled))
    assert a.best_params == b.best_params and a.best_report.mfc == b.best_report.mfc


def test_threads_same_result(instance):
    data, groups = instance
    a = grid_search(data, groups, 3, "average", TuningGrid(**SMALL))
    b = grid_search(data, groups, 3, "average", TuningGrid(**SMALL), workers=4)
    assert a.table == b.table and a.best_params == b.best_params


def test_census_table_row():
    cfg = bundled_config("census")
    from fairhac.ingest import load_csv, subsample

    data, groups = load_csv(cfg.path, cfg.features, cfg.sensitive)
    data, groups, _ = subsample(data, groups, 60, 0)
    grid = TuningGrid(theta1_values=(0.001,), theta2_values=(0.65,), alpha0_values=(0.0,), beta0_values=(0.0,),
                      modes=("normalized",))
    res = grid_search(data, groups, 4, "single", grid)
    row = res.table[0]
    assert (row["theta1"], row["theta2"], row["schedule"]) == (0.001, 0.65, "exponential")
    assert 0 <= row["mfc"] <= 2
    assert res.to_csv().splitlines()[0].split(",")[-3:] == ["mfc", "balance", "silhouette"]


def test_invalid_grids(instance):
    data, groups = instance
    with pytest.raises(FairHACError):
        TuningGrid(theta1_values=())
    with pytest.raises(FairHACError):
        TuningGrid(modes=("fast",))
    with pytest.raises(FairHACError):
        grid_search(data, groups, 3, "single", TuningGrid(**SMALL), objective="revenue")
    with pytest.raises(FairHACError):
        grid_search(data, groups, 3, "single", TuningGrid(**SMALL), algorithm="afhac")


def test_degenerate_config_constant():
    assert DEGENERATE_CONFIG["alpha0"] == math.inf and DEGENERATE_CONFIG["beta0"] == 0.0
