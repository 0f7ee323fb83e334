import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_dataset
from fairhac.core import Dataset, FairHACError, GroupAssignment, cut
from fairhac.fhac import (
    DEGENERATE_ALPHA, DEGENERATE_BETA, MODES, Schedule, fhac, merged_proportion, new_state, schedule_eval,
    select_merge,
)
from fairhac.hac import vanilla_hac
from fairhac.linkage import CRITERIA
from fairhac.metrics import group_proportions


def four_points():
    data = Dataset(np.array([[0.0], [0.5], [10.0], [10.5]]))
    groups = GroupAssignment.from_labels(["A", "A", "B", "B"])
    return data, groups


class TestSchedule:
    def test_exponential(self):
        assert schedule_eval(Schedule("exponential", 3.7, 0.0), 0) == 1.0
        assert schedule_eval(Schedule("exponential", 0.001, 0.0), 100) == pytest.approx(1.10517, abs=1e-5)

    def test_linear(self):
        assert Schedule("linear", 5.0, 1.0)(0) == 1.0
        assert Schedule("linear", 1.0, -3.0)(1) == 0.0

    def test_constant_and_inf(self):
        assert Schedule.constant(0.3)(17) == 0.3
        assert DEGENERATE_ALPHA(5) == math.inf

    def test_invalid(self):
        with pytest.raises(FairHACError):
            Schedule("cubic", 1.0, 0.0)
        with pytest.raises(FairHACError):
            Schedule("linear", -1.0, 0.0)
        with pytest.raises(FairHACError):
            Schedule.constant(1.0)(-1)

    def test_overflow_is_inf(self):
        assert Schedule("exponential", 1.0, 0.0)(1e6) == math.inf

    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from(["exponential", "linear"]), st.floats(0, 2), st.floats(-5, 5),
           st.floats(0, 500), st.floats(0, 500))
    def test_monotone(self, kind, theta, offset, x, y):
        s = Schedule(kind, theta, offset)
        lo, hi = sorted((x, y))
        assert 0 <= s(lo) <= s(hi)


def test_merged_proportion():
    assert merged_proportion(1.0, 1, 0.0, 1) == 0.5
    assert merged_proportion(0.25, 4, 0.25, 4) == 0.25
    assert merged_proportion(1.0, 3, 0.0, 1) == 0.75


class TestSelectMerge:
    def test_vanilla_behaviour(self):
        data, groups = four_points()
        state = new_state(data, groups, "single")
        dec = select_merge(state, 1.0, 0.0)
        assert dec.pair == (0, 1) and dec.distance == 0.5 and dec.fair_count == 2

    def test_first_round_normalized(self):
        data, groups = four_points()
        state = new_state(data, groups, "single")
        dec = select_merge(state, 0.1, 11.0)
        assert dec.pair == (1, 2) and dec.distance == 9.5 and dec.fair_count == 2
        assert dec.per_group_flags == (True, True)

    def test_second_round_normalized(self):
        data, groups = four_points()
        state = new_state(data, groups, "single")
        state.merge(1, 2)
        dec = select_merge(state, 0.1, 11.0)
        assert dec.pair == (0, 3) and dec.distance == 10.5 and dec.fair_count == 2

    def test_first_round_paper_literal(self):
        # the ordered scan keeps replacing the incumbent with equally fair pairs
        # that are within beta of it, so a farther pair wins
        data, groups = four_points()
        state = new_state(data, groups, "single")
        dec = select_merge(state, 0.1, 11.0, "paper-literal")
        assert dec.pair == (1, 3) and dec.distance == 10.0 and dec.fair_count == 2

    def test_paper_literal_small_beta_is_vanilla(self):
        data, groups = four_points()
        state = new_state(data, groups, "single")
        assert select_merge(state, math.inf, 0.0, "paper-literal").pair == (0, 1)

    def test_errors(self):
        data, groups = four_points()
        state = new_state(data, groups, "single")
        with pytest.raises(FairHACError):
            select_merge(state, 0.1, 0.0, "greedy")
        for a, b in ((0, 1), (2, 3), (4, 5)):
            state.merge(a, b)
        with pytest.raises(FairHACError):
            select_merge(state, 0.1, 0.0)


class TestFhac:
    def test_four_point_instance(self):
        data, groups = four_points()
        res = fhac(data, groups, 2, "single", Schedule.constant(0.1), Schedule.constant(11.0))
        assert cut(res.tree, 2).members()[0].tolist() == [0, 3]
        assert cut(res.tree, 2).members()[1].tolist() == [1, 2]
        assert res.report.mfc == 0 and res.report.balance == 1
        assert res.all_constraints_met
        van = cut(vanilla_hac(data, "single"), 2)
        from fairhac.metrics import balance, mfc

        assert mfc(van, groups) == 1 and balance(van, groups) == 0

    def test_n_equals_k(self):
        data, groups = four_points()
        res = fhac(data, groups, 4, "average", Schedule.constant(0.1), Schedule.constant(1.0))
        assert res.tree.merges == () and res.report.k == 4

    def test_complete_tree(self):
        data, groups = four_points()
        res = fhac(data, groups, 2, "single", Schedule.constant(0.1), Schedule.constant(11.0), complete_tree=True)
        assert res.tree.complete and res.report.mfc == 0

    def test_bad_inputs(self):
        data, groups = four_points()
        with pytest.raises(FairHACError):
            fhac(data, groups, 0, "single", DEGENERATE_ALPHA, DEGENERATE_BETA)
        with pytest.raises(FairHACError):
            fhac(data, groups, 2, "median", DEGENERATE_ALPHA, DEGENERATE_BETA)
        with pytest.raises(FairHACError):
            fhac(data, groups, 2, "single", DEGENERATE_ALPHA, DEGENERATE_BETA, mode="x")


@pytest.mark.parametrize("criterion", CRITERIA)
@pytest.mark.parametrize("mode", MODES)
def test_degenerate_equals_vanilla(criterion, mode):
    rng = np.random.default_rng(11)
    for _ in range(5):
        data, groups = random_dataset(rng, int(rng.integers(2, 65)), int(rng.integers(1, 9)))
        res = fhac(data, groups, 1, criterion, DEGENERATE_ALPHA, DEGENERATE_BETA, mode)
        assert res.tree == vanilla_hac(data, criterion)


def random_schedules(rng):
    kind = str(rng.choice(["exponential", "linear", "constant"]))
    if kind == "constant":
        return Schedule.constant(float(rng.uniform(0, 1))), Schedule.constant(float(rng.uniform(0, 2)))
    za = Schedule(kind, float(rng.uniform(0, 0.2)), float(rng.uniform(-3, 0.5)))
    zb = Schedule(kind, float(rng.uniform(0, 0.2)), float(rng.uniform(-3, 1)))
    return za, zb


@pytest.mark.parametrize("seed", range(30))
def test_run_invariants(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 30))
    data, groups = random_dataset(rng, n, 2, int(rng.integers(2, 4)))
    k = int(rng.integers(1, n))
    za, zb = random_schedules(rng)
    mode = MODES[seed % 2]
    crit = CRITERIA[seed % 3]
    res = fhac(data, groups, k, crit, za, zb, mode)

    assert all(b <= a for a, b in zip(res.alphas, res.alphas[1:]))
    assert all(b >= a for a, b in zip(res.betas, res.betas[1:]))
    assert res.evaluations <= groups.f * n**3
    if res.all_constraints_met:
        assert res.report.mfc <= groups.f * za(0) + 1e-12

    # incrementally merged proportions equal a recount of the final clusters
    clusters = cut(res.tree, k)
    recount = group_proportions(clusters, groups)
    for members, row in zip(clusters.members(), recount):
        roots = [v for v, d in res.final_delta.items() if set(res.tree.leaves(v)) == set(members.tolist())]
        assert len(roots) == 1
        np.testing.assert_allclose(res.final_delta[roots[0]], row, atol=1e-12)

    # every recorded merge distance is the real linkage distance between its children
    from fairhac.linkage import linkage_distance, pairwise_distances

    base = pairwise_distances(data.points)
    for m in res.tree.merges:
        want = linkage_distance(res.tree.leaves(m.left), res.tree.leaves(m.right), crit, base)
        assert m.distance == pytest.approx(want, rel=1e-9, abs=1e-12)
