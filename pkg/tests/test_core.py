import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairhac.core import (
    Clustering, CutUnavailableError, Dataset, Dendrogram, FairHACError, GroupAssignment, InvalidGroupError,
    Merge, canonical, cut, derive_ideal_proportions,
)
from fairhac.hac import vanilla_hac


def chain4():
    return Dendrogram(4, (Merge(0, 1, 1.0, 2), Merge(4, 2, 2.0, 3), Merge(5, 3, 4.0, 4)))


class TestIdealProportions:
    def test_symmetric(self):
        assert derive_ideal_proportions([0, 0, 1, 1]).tolist() == [0.5, 0.5]

    def test_four_groups_of_four(self):
        np.testing.assert_array_equal(derive_ideal_proportions(np.repeat(np.arange(4), 4)), [0.25] * 4)

    def test_census_shares(self):
        labels = ["Male"] * 376 + ["Female"] * 624
        g = GroupAssignment.from_labels(labels)
        assert g.group_names == ("Male", "Female")
        np.testing.assert_allclose(g.ideal, [0.376, 0.624])

    def test_empty_group_raises(self):
        with pytest.raises(InvalidGroupError):
            derive_ideal_proportions([0, 0, 2], 3)

    def test_custom_ideal_must_be_positive(self):
        with pytest.raises(InvalidGroupError):
            GroupAssignment(np.array([0, 1]), 2, ideal=np.array([1.0, 0.0]))


class TestDataset:
    def test_rejects_nonfinite(self):
        with pytest.raises(FairHACError):
            Dataset(np.array([[0.0], [np.nan]]))

    def test_ids_default(self):
        d = Dataset(np.zeros((3, 2)))
        assert list(d.ids) == [0, 1, 2] and d.n == 3 and d.m == 2

    def test_immutable(self):
        d = Dataset(np.zeros((2, 1)))
        with pytest.raises(ValueError):
            d.points[0, 0] = 1.0


class TestDendrogram:
    def test_sizes_checked(self):
        with pytest.raises(FairHACError):
            Dendrogram(3, (Merge(0, 1, 1.0, 3),))

    def test_node_reuse_rejected(self):
        with pytest.raises(FairHACError):
            Dendrogram(3, (Merge(0, 1, 1.0, 2), Merge(0, 2, 1.0, 2)))

    def test_forest_flag(self):
        assert not Dendrogram(4, (Merge(0, 1, 1.0, 2),)).complete
        assert chain4().complete

    def test_json_round_trip(self):
        t = chain4()
        data = json.loads(t.to_json())
        assert data["n_leaves"] == 4 and data["complete"] is True
        assert data["merges"][1] == {"left": 4, "right": 2, "distance": 2.0, "size": 3}
        assert Dendrogram.from_json(t.to_json()) == t

    def test_newick(self):
        assert chain4().to_newick() == "(((0:1.0,1:1.0):1.0,2:2.0):2.0,3:4.0);"

    def test_leaves_and_roots(self):
        t = chain4()
        assert sorted(t.leaves(5)) == [0, 1, 2]
        assert sorted(t.roots(2)) == [3, 5]


class TestCut:
    def test_replay_two_merges(self):
        assert cut(chain4(), 2) == Clustering.from_sets([{0, 1, 2}, {3}])

    def test_k_equals_n(self):
        assert cut(chain4(), 4).assignment.tolist() == [0, 1, 2, 3]

    def test_k_one(self):
        assert cut(chain4(), 1).assignment.tolist() == [0, 0, 0, 0]

    def test_forest_too_short(self):
        with pytest.raises(CutUnavailableError):
            cut(Dendrogram(4, (Merge(0, 1, 1.0, 2),)), 2)
        with pytest.raises(CutUnavailableError):
            cut(chain4(), 0)

    def test_canonical_labels(self):
        assert canonical([5, 5, 2, 7]).assignment.tolist() == [0, 0, 1, 2]


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**31 - 1))
def test_cut_refines_and_has_k_clusters(n, seed):
    pts = np.random.default_rng(seed).normal(size=(n, 2))
    tree = vanilla_hac(Dataset(pts), "average")
    prev = None
    for k in range(1, n + 1):
        c = cut(tree, k)
        assert c.k == k and len(np.unique(c.assignment)) == k
        if prev is not None:
            # every k-cluster lies inside one (k-1)-cluster
            for members in c.members():
                assert len(np.unique(prev.assignment[members])) == 1
        prev = c


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 25), st.integers(0, 2**31 - 1))
def test_cut_matches_set_replay(n, seed):
    tree = vanilla_hac(Dataset(np.random.default_rng(seed).normal(size=(n, 1))), "single")
    for k in (1, max(1, n // 2), n):
        sets = {i: {i} for i in range(n)}
        for i, m in enumerate(tree.merges[: n - k]):
            sets[n + i] = sets.pop(m.left) | sets.pop(m.right)
        assert cut(tree, k) == Clustering.from_sets(sets.values(), n)
