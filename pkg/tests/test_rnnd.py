"""Nearest-neighbor digraph construction, the exact three-point law, and
sampling statistics."""

import math

import numpy as np
import pytest

from randig import (
    Digraph,
    Graph,
    KNearest,
    PointCloud,
    RankSubset,
    Rnnd,
    UnsupportedExactError,
    ValidationError,
    apply_permutation,
    knn_digraph,
    rnnd_exact_pmf_n3k1,
    rnnd_stats,
    sample_rnnd,
    underlying_pmf,
)
from randig.digraph import popcount_array
from randig.rnnd import DistanceTieWarning, exact_pmf_rnnd, sample_rnnd_masks

SEED = 31


# --- rules and validation ---------------------------------------------------------

def test_rule_validation():
    with pytest.raises(ValidationError):
        KNearest(0)
    with pytest.raises(ValidationError):
        RankSubset(set())
    with pytest.raises(ValidationError):
        RankSubset({0, 2})
    assert RankSubset({3, 1}).ranks == (1, 3)
    assert RankSubset({3, 1}).max_rank == 3
    assert KNearest(2).ranks == (1, 2)


def test_spec_validation():
    with pytest.raises(ValidationError):
        Rnnd(3, KNearest(2))  # k < n - 1 required
    with pytest.raises(ValidationError):
        Rnnd(2, KNearest(1))
    with pytest.raises(ValidationError):
        Rnnd(5, KNearest(2), dist="cauchy")
    with pytest.raises(ValidationError):
        Rnnd(5, KNearest(2), norm="L7")
    Rnnd(4, RankSubset({1, 2}))  # max rank 2 < 3


def test_point_cloud_validation():
    with pytest.raises(ValidationError):
        PointCloud(coords=np.array([[0.0], [1.0]]))  # n >= 3
    with pytest.raises(ValidationError):
        PointCloud(coords=np.array([[0.0], [np.inf], [1.0]]))
    with pytest.raises(ValidationError):
        PointCloud(coords=np.zeros((3, 2)), norm="L3")


# --- construction -----------------------------------------------------------------

def test_knn_digraph_line_example():
    cloud = PointCloud(coords=np.array([[0.0], [1.0], [3.0]]))
    d = knn_digraph(cloud, KNearest(1))
    assert set(d.arc_list()) == {(1, 2), (2, 1), (3, 2)}


def test_knn_digraph_second_neighbor_example():
    cloud = PointCloud(coords=np.array([[0.0], [1.0], [3.0], [7.0]]))
    d = knn_digraph(cloud, RankSubset({2}))
    assert set(d.arc_list()) == {(1, 3), (2, 3), (3, 1), (4, 2)}


def test_knn_digraph_out_degree():
    rng = np.random.default_rng(8)
    cloud = PointCloud(coords=rng.random((7, 3)))
    for k in (1, 2, 3):
        d = knn_digraph(cloud, KNearest(k))
        for i in range(1, 8):
            assert sum(1 for a, _ in d.arc_list() if a == i) == k
    d = knn_digraph(cloud, RankSubset({2, 4}))
    for i in range(1, 8):
        assert sum(1 for a, _ in d.arc_list() if a == i) == 2


def test_knn_digraph_rejects_large_rank():
    cloud = PointCloud(coords=np.zeros((4, 1)) + np.arange(4)[:, None])
    with pytest.raises(ValidationError):
        knn_digraph(cloud, KNearest(3))


def test_knn_digraph_tie_warning():
    cloud = PointCloud(coords=np.array([[0.0], [1.0], [2.0]]))  # 2 is tied for point 2
    with pytest.warns(DistanceTieWarning):
        d = knn_digraph(cloud, KNearest(1))
    assert d.has_arc(2, 1)  # lower index wins the tie


def test_norms_change_neighbors():
    # From (0,0): L1 favors (1.2, 0), Linf favors (0.9, 0.85).
    coords = np.array([[0.0, 0.0], [1.2, 0.0], [0.9, 0.85]])
    l1 = knn_digraph(PointCloud(coords=coords, norm="L1"), KNearest(1))
    linf = knn_digraph(PointCloud(coords=coords, norm="Linf"), KNearest(1))
    assert l1.has_arc(1, 2) and not l1.has_arc(1, 3)
    assert linf.has_arc(1, 3) and not linf.has_arc(1, 2)


def test_relabeling_equivariance():
    rng = np.random.default_rng(14)
    coords = rng.random((6, 2))
    sigma = [3, 1, 6, 2, 5, 4]
    base = knn_digraph(PointCloud(coords=coords), KNearest(2))
    permuted_coords = np.empty_like(coords)
    for i in range(6):
        permuted_coords[sigma[i] - 1] = coords[i]
    relabeled = knn_digraph(PointCloud(coords=permuted_coords), KNearest(2))
    assert relabeled == apply_permutation(base, sigma)


# --- exact three-point law ----------------------------------------------------------

def test_exact_n3k1_pmf():
    pmf = rnnd_exact_pmf_n3k1()
    assert pmf.mass(Digraph.from_arcs(3, [(1, 2), (2, 1), (3, 1)])) == pytest.approx(1 / 6)
    assert pmf.mass(Digraph.from_arcs(3, [(1, 2), (1, 3), (2, 3)])) == 0.0
    assert pmf.support_size() == 6
    assert pmf.total() == pytest.approx(1.0)


def test_exact_n3k1_underlying_is_two_edge_uniform():
    pushed = underlying_pmf(rnnd_exact_pmf_n3k1())
    masses = sorted(p for _, p in pushed.items())
    assert masses == pytest.approx([1 / 3, 1 / 3, 1 / 3])
    for mask, _ in pushed.items():
        assert Graph(3, mask).num_edges() == 2


def test_exact_pmf_guard():
    with pytest.raises(UnsupportedExactError):
        exact_pmf_rnnd(Rnnd(5, KNearest(2)))
    # rank set {1} is the same rule as 1-nearest
    assert exact_pmf_rnnd(Rnnd(3, RankSubset({1}))).support_size() == 6


@pytest.mark.parametrize("dist", ["uniform", "normal"])
@pytest.mark.parametrize("norm", ["L1", "L2", "Linf"])
def test_sampler_n3k1_uniform_over_six(dist, norm):
    spec = Rnnd(3, KNearest(1), d=2, dist=dist, norm=norm)
    n_samples = 20000
    masks = sample_rnnd_masks(spec, SEED, n_samples)
    freq = np.bincount(masks.astype(np.int64), minlength=64) / n_samples
    target = rnnd_exact_pmf_n3k1().dense()
    se = math.sqrt((1 / 6) * (5 / 6) / n_samples)
    for mask in range(64):
        if target[mask] > 0:
            assert abs(freq[mask] - 1 / 6) <= 4 * se
        else:
            assert freq[mask] == 0.0


def test_sampler_n3k1_always_one_symmetric_pair():
    from randig.digraph import symmetric_pair_counts

    masks = sample_rnnd_masks(Rnnd(3, KNearest(1), d=1), SEED, 5000)
    assert np.all(symmetric_pair_counts(3, masks) == 1)


# --- sampling ------------------------------------------------------------------------

def test_sample_rnnd_deterministic():
    spec = Rnnd(5, KNearest(2), d=2)
    assert sample_rnnd(spec, 9) == sample_rnnd(spec, 9)
    masks = sample_rnnd_masks(spec, 9, 10)
    assert int(masks[0]) == sample_rnnd(spec, 9).arcs


def test_sample_rnnd_large_n_path():
    spec = Rnnd(12, KNearest(3), d=2)
    d = sample_rnnd(spec, 4)
    assert d.n == 12
    counts = {}
    for i, _ in d.arc_list():
        counts[i] = counts.get(i, 0) + 1
    assert all(v == 3 for v in counts.values()) and len(counts) == 12


def test_samples_have_constant_arc_count():
    spec = Rnnd(6, KNearest(2), d=2)
    masks = sample_rnnd_masks(spec, SEED, 3000)
    assert np.all(popcount_array(masks, 30) == 12)  # n * k arcs in every draw


def test_no_vertex_with_zero_out_degree():
    spec = Rnnd(5, KNearest(2), d=3, dist="normal")
    masks = sample_rnnd_masks(spec, SEED, 3000)
    for i in range(5):
        row = np.zeros(masks.shape, dtype=np.int64)
        for j in range(5):
            if i != j:
                from randig.digraph import arc_slot

                s = arc_slot(5, i + 1, j + 1)
                row += ((masks >> np.uint64(s)) & np.uint64(1)).astype(np.int64)
        assert row.min() == 2 and row.max() == 2


# --- statistics -----------------------------------------------------------------------

def test_rnnd_stats_moments():
    spec = Rnnd(5, KNearest(2), d=2, dist="uniform", norm="L2")
    stats = rnnd_stats(spec, 10 ** 5, seed=SEED)
    marginal, joint = stats.arc_marginal_est, stats.joint_pair_est
    assert abs(marginal.value - 0.5) <= 4 * marginal.std_error
    assert abs(joint.value - 1 / 6) <= 4 * joint.std_error
    assert stats.out_degree_min == 2 and stats.out_degree_max == 2
    assert stats.in_degree_max >= 2
    assert sum(stats.n_s_histogram.values()) == 10 ** 5


def test_rnnd_stats_subset_rule():
    spec = Rnnd(6, RankSubset({2}), d=2)
    stats = rnnd_stats(spec, 2000, seed=SEED)
    assert stats.out_degree_min == 1 and stats.out_degree_max == 1
    # the 2nd-nearest arc marginal is 1/(n-1) by symmetry
    assert abs(stats.arc_marginal_est.value - 0.2) <= 4 * stats.arc_marginal_est.std_error


def test_rnnd_stats_in_degree_stays_bounded_as_n_grows():
    # The number of points sharing a nearest neighbor is bounded by a
    # constant depending only on (d, k, norm); observed maxima should not
    # drift upward with n.
    small = rnnd_stats(Rnnd(15, KNearest(1), d=2), 2000, seed=SEED)
    large = rnnd_stats(Rnnd(40, KNearest(1), d=2), 2000, seed=SEED)
    assert small.in_degree_max <= 6 and large.in_degree_max <= 6
    assert abs(large.in_degree_max - small.in_degree_max) <= 1


def test_rnnd_stats_validation():
    with pytest.raises(ValidationError):
        rnnd_stats(Rnnd(5, KNearest(2)), 10, seed=1)


def test_point_cloud_csv_round_trip(tmp_path):
    cloud = PointCloud(coords=np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]))
    path = tmp_path / "points.csv"
    cloud.to_csv(path)
    back = PointCloud.from_csv(path)
    assert np.allclose(back.coords, cloud.coords)
