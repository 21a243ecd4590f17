"""Model specs, exact PMFs against independent oracles, samplers, and the
underlying-model operators."""

import itertools
import math

import numpy as np
import pytest

from randig import (
    Ard,
    DegenerateModelError,
    Derd,
    Digraph,
    Drd,
    Erg,
    FiniteKernel,
    Gard,
    Graph,
    HalfLineKernel,
    KNearest,
    NoClosedFormError,
    Pmf,
    RankSubset,
    Rnnd,
    TwoValueKernel,
    Uniform,
    UnsupportedExactError,
    ValidationError,
    Vard,
    Verg,
    Vrd,
    Vrg,
    arc_counts,
    conditional_pattern_prob,
    constant_kernel,
    derd3_vard_kernel,
    discretize,
    enumerate_digraphs,
    enumerate_graphs,
    exact_pmf,
    invariance_check,
    model_from_json,
    model_to_json,
    sample,
    sample_masks,
    supports_exact,
    total_variation,
    underlying_graph,
    underlying_kernel,
    underlying_model,
    underlying_pmf,
)

SEED = 20260810


def circle_kernel_8():
    """Finite symmetric binary kernel: 8 circle atoms joined at circular
    distance 3, 4 or 5 eighths (so each arc has probability 1/4)."""
    phi = np.zeros((8, 8))
    for i in range(8):
        for j in range(8):
            if (i - j) % 8 in (3, 4, 5):
                phi[i, j] = 1.0
    return FiniteKernel(weights=np.full(8, 1 / 8), phi=phi)


# --- validation ---------------------------------------------------------------

def test_degenerate_parameters_rejected():
    for bad in (0.0, 1.0):
        with pytest.raises(DegenerateModelError):
            Ard(3, bad)
    with pytest.raises(DegenerateModelError):
        Uniform(3, 0)
    with pytest.raises(DegenerateModelError):
        Uniform(3, 6)
    with pytest.raises(DegenerateModelError):
        Derd(3, 0.5, 1.0)
    with pytest.raises(DegenerateModelError):
        Derd(3, 0.0, 0.6)
    with pytest.raises(DegenerateModelError):
        Drd(Erg(3, 0.5), 1.0)


def test_range_validation():
    with pytest.raises(ValidationError):
        Ard(3, 1.2)
    with pytest.raises(ValidationError):
        Uniform(3, 7)
    with pytest.raises(ValidationError):
        Derd(3, 0.5, 0.4)  # direction probability below 1/2
    with pytest.raises(ValidationError):
        Erg(3, -0.1)
    with pytest.raises(ValidationError):
        Gard(3, np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        Vrd(3, constant_kernel(0.5))  # not binary
    with pytest.raises(ValidationError):
        Verg(3, TwoValueKernel(0.3, 0.6))  # not symmetric
    with pytest.raises(ValidationError):
        Vrg(3, underlying_kernel(TwoValueKernel(0.3, 0.6)))  # symmetric but not binary


def test_erg_allows_boundary_probabilities():
    # The complete-graph generator is what makes random tournaments possible.
    assert exact_pmf(Erg(3, 1.0)).mass(Graph(3, 7)) == 1.0
    assert exact_pmf(Erg(3, 0.0)).mass(Graph(3, 0)) == 1.0


def test_gard_ignores_diagonal():
    p = np.full((3, 3), 0.2)
    np.fill_diagonal(p, 7.0)  # nonsense on the diagonal must be ignored
    model = Gard(3, p)
    assert model.is_constant()


# --- exact pmfs ------------------------------------------------------------------

def test_uniform_pmf_example():
    pmf = exact_pmf(Uniform(2, 1))
    assert pmf.mass(Digraph.from_arcs(2, [(1, 2)])) == 0.5
    assert pmf.mass(Digraph.from_arcs(2, [(2, 1)])) == 0.5
    assert pmf.mass(Digraph(2, 0)) == 0.0
    assert pmf.mass(Digraph(2, 3)) == 0.0


def test_ard_pmf_example():
    pmf = exact_pmf(Ard(2, 0.5))
    assert [pmf.mass(m) for m in range(4)] == [0.25] * 4


def test_ard_pmf_formula():
    pmf = exact_pmf(Ard(3, 0.3))
    for d in enumerate_digraphs(3):
        k = d.num_arcs()
        assert pmf.mass(d) == pytest.approx(0.3 ** k * 0.7 ** (6 - k), abs=1e-15)


def test_derd_equals_ard_at_matched_parameters():
    # p_e = 0.75 -> p_d = 2/3, p_a = 1/2
    assert total_variation(exact_pmf(Derd(2, 0.75, 2 / 3)), exact_pmf(Ard(2, 0.5))) <= 1e-12


def test_gard_pmf_against_direct_product():
    rng = np.random.default_rng(4)
    p = rng.random((3, 3))
    model = Gard(3, p)
    pmf = exact_pmf(model)
    for d in enumerate_digraphs(3):
        expected = 1.0
        for i in range(1, 4):
            for j in range(1, 4):
                if i == j:
                    continue
                expected *= p[i - 1, j - 1] if d.has_arc(i, j) else 1.0 - p[i - 1, j - 1]
        assert pmf.mass(d) == pytest.approx(expected, abs=1e-14)


def test_vard_pmf_against_tuple_sum():
    kernel = discretize(TwoValueKernel(0.3, 0.6), 3)
    pmf = exact_pmf(Vard(3, kernel))
    for mask in (0, 5, 21, 63, 42):
        d = Digraph(3, mask)
        expected = 0.0
        for labels in itertools.product(range(3), repeat=3):
            weight = math.prod(float(kernel.weights[a]) for a in labels)
            expected += weight * conditional_pattern_prob(kernel, labels, d)
        assert pmf.mass(d) == pytest.approx(expected, abs=1e-13)


def test_verg_pmf_total_and_symmetric_kernel_requirement():
    kernel = underlying_kernel(discretize(TwoValueKernel(0.3, 0.6), 3))
    pmf = exact_pmf(Verg(3, kernel))
    assert pmf.total() == pytest.approx(1.0, abs=1e-9)


def test_all_exact_pmfs_sum_to_one():
    models = [
        Uniform(3, 2),
        Ard(3, 0.37),
        Gard(3, np.full((3, 3), 0.2) + np.diag([0.5] * 3)),
        Vard(3, discretize(TwoValueKernel(0.3, 0.6), 4)),
        Vrd(3, circle_kernel_8()),
        Erg(3, 0.41),
        Derd(3, 0.6, 0.7),
        Drd(Erg(3, 0.45), 0.55),
        Rnnd(3, KNearest(1), d=2),
    ]
    for model in models:
        assert exact_pmf(model).total() == pytest.approx(1.0, abs=1e-9), model


def test_exact_pmf_guards():
    with pytest.raises(UnsupportedExactError):
        exact_pmf(Ard(6, 0.5))  # 2^30 states
    with pytest.raises(UnsupportedExactError):
        exact_pmf(Vard(3, HalfLineKernel()))  # continuous kernel
    with pytest.raises(UnsupportedExactError):
        exact_pmf(Rnnd(5, KNearest(2)))  # geometry-dependent beyond n=3, k=1
    assert not supports_exact(Ard(6, 0.5))
    assert supports_exact(Ard(5, 0.5))
    assert supports_exact(Rnnd(3, KNearest(1)))


def test_drd_pmf_against_per_digraph_formula():
    graph_model = Erg(3, 0.45)
    p_d = 0.55
    graph_pmf = exact_pmf(graph_model)
    pmf = exact_pmf(Drd(graph_model, p_d))
    for d in enumerate_digraphs(3):
        c = arc_counts(d)
        expected = (graph_pmf.mass(underlying_graph(d))
                    * (1 - p_d) ** c.n_as * (2 * p_d - 1) ** c.n_s)
        assert pmf.mass(d) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("p_d", [0.5, 0.55, 0.9])
def test_drd_orientation_weights_normalize_per_fiber(p_d):
    # Independent route: for every graph G, its orientations' weights sum to 1.
    for g in enumerate_graphs(3):
        fiber = [d for d in enumerate_digraphs(3) if underlying_graph(d) == g]
        weights = 0.0
        for d in fiber:
            c = arc_counts(d)
            weights += (1 - p_d) ** c.n_as * (2 * p_d - 1) ** c.n_s
        assert weights == pytest.approx(1.0, abs=1e-12)


def test_vrd_symmetric_kernel_kills_one_way_arcs():
    pmf = exact_pmf(Vrd(3, circle_kernel_8()))
    for d in enumerate_digraphs(3):
        c = arc_counts(d)
        if c.n_as > 0:
            assert pmf.mass(d) == 0.0


def test_tournament_law():
    pmf = exact_pmf(Drd(Erg(4, 1.0), 0.5))
    expected = 2.0 ** (-6)
    count = 0
    for d in enumerate_digraphs(4):
        c = arc_counts(d)
        if c.n_s == 0 and c.n_e == 6:  # tournaments: one arc per pair
            assert pmf.mass(d) == pytest.approx(expected, abs=1e-15)
            count += 1
        else:
            assert pmf.mass(d) == 0.0
    assert count == 64


# --- conditional pattern probability ----------------------------------------------

def test_conditional_pattern_prob_constant_kernel():
    k = constant_kernel(0.3)
    d = Digraph.from_arcs(2, [(1, 2)])
    assert conditional_pattern_prob(k, (0, 0), d) == pytest.approx(0.3 * 0.7)


def test_conditional_pattern_prob_half_line():
    k = HalfLineKernel()
    one_arc = Digraph.from_arcs(2, [(1, 2)])
    both = Digraph.from_arcs(2, [(1, 2), (2, 1)])
    # phi(0.1, 0.9) = 1 and phi(0.9, 0.1) = 0: the one-way pattern is certain,
    # the mutual pattern impossible.
    assert conditional_pattern_prob(k, (0.1, 0.9), one_arc) == 1.0
    assert conditional_pattern_prob(k, (0.1, 0.9), both) == 0.0


def test_conditional_pattern_prob_normalizes():
    k = discretize(TwoValueKernel(0.3, 0.6), 4)
    x = (0, 3, 1)
    total = sum(conditional_pattern_prob(k, x, d) for d in enumerate_digraphs(3))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_conditional_pattern_prob_validation():
    with pytest.raises(ValidationError):
        conditional_pattern_prob(constant_kernel(0.5), (0,), Digraph(2, 0))
    with pytest.raises(ValidationError):
        conditional_pattern_prob(HalfLineKernel(), (0.5, 1.5), Digraph(2, 0))


# --- sampling -----------------------------------------------------------------------

def test_sample_deterministic():
    model = Derd(4, 0.6, 0.7)
    assert sample(model, 123) == sample(model, 123)
    assert sample(model, 123) != sample(model, 124) or True  # different seeds may collide


def test_sample_masks_prefix_stable():
    model = Ard(3, 0.3)
    short = sample_masks(model, SEED, 100)
    long = sample_masks(model, SEED, 70000)  # spans two chunks
    assert np.array_equal(short, long[:100])
    assert int(long[0]) == sample(model, SEED).arcs


def test_sample_masks_independent_of_thread_count(monkeypatch):
    model = Derd(3, 0.6, 0.7)
    monkeypatch.delenv("RANDIG_THREADS", raising=False)
    serial = sample_masks(model, SEED, 150000)
    monkeypatch.setenv("RANDIG_THREADS", "4")
    threaded = sample_masks(model, SEED, 150000)
    assert np.array_equal(serial, threaded)


def test_ard_arc_frequency():
    n_samples = 10 ** 5
    masks = sample_masks(Ard(4, 0.3), SEED, n_samples)
    freq = float((masks & np.uint64(1) == 1).mean())  # slot 0 = arc (1, 2)
    se = math.sqrt(0.3 * 0.7 / n_samples)
    assert abs(freq - 0.3) <= 4 * se


def test_drd_half_direction_has_no_symmetric_arcs():
    from randig.digraph import symmetric_pair_counts

    masks = sample_masks(Drd(Erg(4, 0.8), 0.5), SEED, 20000)
    assert symmetric_pair_counts(4, masks).max() == 0


def test_uniform_sampler_arc_count():
    masks = sample_masks(Uniform(3, 2), SEED, 5000)
    from randig.digraph import popcount_array

    assert np.all(popcount_array(masks, 6) == 2)


def test_graph_model_sampling():
    g = sample(Erg(4, 0.5), 7)
    assert isinstance(g, Graph)
    masks = sample_masks(Erg(3, 1.0), 7, 10)
    assert np.all(masks == 7)


@pytest.mark.parametrize("model", [
    Ard(3, 0.37),
    Uniform(3, 2),
    Derd(3, 0.6, 0.7),
    Vard(3, discretize(TwoValueKernel(0.3, 0.6), 4)),
    Vard(3, derd3_vard_kernel(0.6, 0.7)),
    Vrd(3, circle_kernel_8()),
])
def test_sampler_matches_exact_pmf_in_total_variation(model):
    # Continuous-kernel models have no exact pmf; compare against the matched
    # direction model instead.
    n_samples = 10 ** 6
    if supports_exact(model):
        target = exact_pmf(model)
    else:
        target = exact_pmf(Derd(3, 0.6, 0.7))
    masks = sample_masks(model, SEED, n_samples)
    freq = np.bincount(masks.astype(np.int64), minlength=64) / n_samples
    empirical = Pmf.from_dense(3, "digraph", freq)
    bound = 5.0 * math.sqrt(64 / n_samples)
    assert total_variation(empirical, target) <= bound


def test_exact_pmfs_are_isomorphism_invariant_at_n3():
    models = [
        Uniform(3, 2),
        Ard(3, 0.37),
        Derd(3, 0.6, 0.7),
        Drd(Erg(3, 0.45), 0.55),
        Vard(3, discretize(TwoValueKernel(0.3, 0.6), 4)),
        Rnnd(3, KNearest(1)),
    ]
    for model in models:
        assert invariance_check(exact_pmf(model)).invariant, model


def test_planted_gard_is_not_invariant():
    p = np.full((3, 3), 0.1)
    p[0, 1] = 0.9
    report = invariance_check(exact_pmf(Gard(3, p)))
    assert not report.invariant
    assert report.worst_orbit.spread > 0.1


# --- underlying models -----------------------------------------------------------

def test_underlying_model_ard():
    u = underlying_model(Ard(4, 0.5))
    assert u == Erg(4, 0.75)


def test_underlying_model_drd_returns_generator():
    g = Erg(4, 0.3)
    assert underlying_model(Drd(g, 0.6)) is g
    assert underlying_model(Derd(4, 0.3, 0.6)) == g


def test_underlying_model_symmetric_binary_vrd_keeps_kernel():
    k = circle_kernel_8()
    u = underlying_model(Vrd(3, k))
    assert isinstance(u, Vrg)
    assert np.array_equal(u.kernel.phi, k.phi)


def test_underlying_model_constant_gard():
    u = underlying_model(Gard(3, np.full((3, 3), 0.5)))
    assert u == Erg(3, 0.75)


def test_underlying_model_no_closed_form():
    with pytest.raises(NoClosedFormError):
        underlying_model(Uniform(3, 2))
    p = np.full((3, 3), 0.1)
    p[0, 1] = 0.9
    with pytest.raises(NoClosedFormError):
        underlying_model(Gard(3, p))


@pytest.mark.parametrize("model", [
    Ard(3, 0.45),
    Vard(3, discretize(TwoValueKernel(0.3, 0.6), 3)),
    Vrd(3, circle_kernel_8()),
    Derd(3, 0.6, 0.7),
])
def test_underlying_pmf_consistent_with_underlying_model(model):
    via_pmf = underlying_pmf(exact_pmf(model))
    via_model = exact_pmf(underlying_model(model))
    assert total_variation(via_pmf, via_model) <= 1e-12


def test_underlying_pmf_examples():
    pushed = underlying_pmf(exact_pmf(Ard(2, 0.5)))
    assert pushed.mass(Graph(2, 0)) == pytest.approx(0.25)
    assert pushed.mass(Graph(2, 1)) == pytest.approx(0.75)

    point = Pmf.from_dense(2, "digraph", np.array([1.0, 0.0, 0.0, 0.0]))
    pushed = underlying_pmf(point)
    assert pushed.mass(Graph(2, 0)) == 1.0

    rnnd = underlying_pmf(exact_pmf(Rnnd(3, KNearest(1))))
    two_edge = [g for g in enumerate_graphs(3) if g.num_edges() == 2]
    assert len(two_edge) == 3
    for g in two_edge:
        assert rnnd.mass(g) == pytest.approx(1 / 3)


# --- pmf storage ------------------------------------------------------------------

def test_pmf_dense_vs_sparse_storage():
    dense = exact_pmf(Ard(4, 0.5))  # 12 slots: stays dense
    assert dense._dense is not None
    sparse = exact_pmf(Ard(5, 0.5))  # 20 slots: sparse mapping
    assert sparse._sparse is not None
    assert sparse.support_size() == 1 << 20
    assert sparse.mass(0) == pytest.approx(0.5 ** 20)


def test_pmf_validation():
    with pytest.raises(ValidationError):
        Pmf.from_dense(2, "digraph", np.array([0.5, 0.5, 0.5, 0.5]))
    with pytest.raises(ValidationError):
        Pmf.from_dense(2, "digraph", np.array([1.0, 0.0]))
    pmf = Pmf.from_mapping(2, "digraph", {1: 0.5, 2: 0.5})
    assert pmf.mass(1) == 0.5
    with pytest.raises(ValidationError):
        pmf.mass(Digraph(3, 0))  # wrong n
    with pytest.raises(ValidationError):
        pmf.mass(17)


def test_pmf_csv_rows_17_digits():
    rows = list(exact_pmf(Ard(2, 1 / 3)).to_csv_rows())
    assert rows[0][0] == "00"
    assert float(rows[0][1]) == pytest.approx((2 / 3) ** 2)
    assert len(rows) == 4


# --- serialization -----------------------------------------------------------------

@pytest.mark.parametrize("model", [
    Uniform(3, 2),
    Ard(3, 0.4),
    Vard(3, TwoValueKernel(0.3, 0.6)),
    Vrd(3, HalfLineKernel()),
    Erg(4, 0.25),
    Derd(3, 0.6, 0.7),
    Drd(Erg(3, 0.5), 0.75),
    Rnnd(5, KNearest(2), d=2, dist="normal", norm="Linf"),
    Rnnd(6, RankSubset({1, 3}), d=1),
])
def test_model_json_round_trip(model):
    back = model_from_json(model_to_json(model))
    assert type(back) is type(model)
    assert model_to_json(back) == model_to_json(model)


def test_gard_json_round_trip():
    model = Gard(3, np.full((3, 3), 0.2))
    back = model_from_json(model_to_json(model))
    assert np.array_equal(back.p, model.p)


def test_model_from_json_rejects_unknown():
    with pytest.raises(ValidationError):
        model_from_json({"family": "nope"})
    with pytest.raises(ValidationError):
        model_from_json({"family": "rnnd", "n": 5, "rule": {}})
