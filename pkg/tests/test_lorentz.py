import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arlab import lorentz as lz
from arlab.errors import ArgumentError
from arlab.lorentz import SequenceSpace, SpaceCouple, StepFunction, WeightedSequence
from arlab.streams import stream

from oracles import k_l1_grid, k_optimizer

pieces = st.lists(
    st.tuples(st.floats(0.01, 100.0), st.floats(0.01, 10.0)), min_size=1, max_size=12
)


def test_rearrangement_examples():
    assert lz.decreasing_rearrangement(StepFunction(((1, 2.0),))).pieces == ((1.0, 2.0),)
    got = lz.decreasing_rearrangement(StepFunction(((2, 1.0), (5, 0.5))))
    assert got.pieces == ((5.0, 0.5), (2.0, 1.0))


def test_rearrangement_against_naive_sort():
    rng = stream(3, 0)
    vals = rng.integers(1, 30, 100).astype(float)
    mass = rng.uniform(0.1, 1.0, 100)
    got = lz.decreasing_rearrangement(StepFunction(tuple(zip(vals, mass))))
    ref = {}
    for v, m in sorted(zip(vals, mass), key=lambda p: -p[0]):
        ref[v] = ref.get(v, 0.0) + m
    assert [v for v, _ in got.pieces] == list(ref)
    np.testing.assert_allclose([m for _, m in got.pieces], list(ref.values()), rtol=1e-14)
    assert got.total_mass == pytest.approx(mass.sum(), rel=1e-14)


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 7.0, math.inf])
@pytest.mark.parametrize("p", [0.5, 1.0, 3.0])
def test_indicator_norm(p, q):
    f = StepFunction(((1.0, 0.7), (1.0, 0.8)))
    assert lz.lorentz_quasinorm(f, p, q) == pytest.approx(1.5 ** (1 / p), rel=1e-13)


@settings(max_examples=50, deadline=None)
@given(pieces, st.floats(0.3, 6.0))
def test_q_equal_p_is_lp(pcs, p):
    f = StepFunction(tuple(pcs))
    ref = math.fsum(v**p * m for v, m in pcs) ** (1 / p)
    assert lz.lorentz_quasinorm(f, p, p) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(pieces, st.floats(0.3, 6.0))
def test_q_infinite_is_breakpoint_sup(pcs, p):
    f = StepFunction(tuple(pcs))
    g = lz.decreasing_rearrangement(f).pieces
    cum = np.cumsum([m for _, m in g])
    ref = max(v * c ** (1 / p) for (v, _), c in zip(g, cum))
    assert lz.lorentz_quasinorm(f, p, math.inf) == pytest.approx(ref, rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(pieces, st.floats(0.5, 4.0), st.floats(0.5, 4.0), st.floats(0.01, 50.0))
def test_lorentz_homogeneous(pcs, p, q, c):
    f = StepFunction(tuple(pcs))
    assert lz.lorentz_quasinorm(f.scaled(c), p, q) == pytest.approx(c * lz.lorentz_quasinorm(f, p, q), rel=1e-12)


def test_starstar_constant_and_tail():
    f = StepFunction(((3.0, 2.0),))
    for t in (0.1, 1.0, 2.0):
        assert lz.maximal_starstar(f, 0.5, t) == pytest.approx(3.0)
    g = StepFunction(((3.0, 1.0), (1.0, 2.0)))
    t = 5.0
    ref = ((3.0**0.5 * 1 + 1.0**0.5 * 2) / t) ** 2
    assert lz.maximal_starstar(g, 0.5, t) == pytest.approx(ref, rel=1e-14)


def test_starstar_brute_force_two_pieces():
    # sup over sets E of measure >= t, built from the pieces taken in any order
    f = StepFunction(((2.0, 1.0), (5.0, 0.5)))
    rho = 0.7
    for t in np.linspace(0.05, 1.5, 30):
        best = 0.0
        for order in itertools.permutations(f.pieces):
            left, acc = t, 0.0
            for v, m in order:
                take = min(m, left)
                acc += v**rho * take
                left -= take
            best = max(best, (acc / t) ** (1 / rho))
        assert lz.maximal_starstar(f, rho, t) == pytest.approx(best, rel=1e-13)


def test_starstar_rejects_rho():
    with pytest.raises(ArgumentError):
        lz.maximal_starstar(StepFunction(((1, 1),)), 1.5, 1.0)


def test_block_norm_single_block():
    f = np.array([1.0, 2.0, 0.5])
    # w = 1 everywhere: one block at level 0
    assert lz.block_lorentz_norm(f, 1.0, 0.1, 2.0, 0.7, (2, 2)) == pytest.approx(math.sqrt(0.1 * 5.25))
    # w in [8, 16): level 3
    w = np.array([8.0, 9.0, 15.9])
    inner = lz.lorentz_quasinorm(StepFunction(tuple((v, 0.1) for v in f)), 3.0, 1.5)
    assert lz.block_lorentz_norm(f, w, 0.1, 1.0, 0.5, (3.0, 1.5)) == pytest.approx(2**1.5 * inner, rel=1e-14)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.5])
def test_block_norm_brackets_weighted_lp(p):
    rng = stream(5, 1)
    f = rng.standard_normal(400)
    w = np.exp(rng.uniform(-3, 5, 400))
    block = lz.block_lorentz_norm(f, w, 0.01, p, 1 / p, (p, p))
    direct = lz.weighted_lp_norm(f, w, 0.01, p)
    ratio = direct / block
    assert 1.0 <= ratio <= 2 ** (1 / p)


def test_retract_identities():
    rng = stream(5, 2)
    f = rng.standard_normal(50)
    w = np.exp(rng.uniform(-4, 4, 50))
    blocks = lz.embed_blocks(f, w)
    np.testing.assert_array_equal(lz.section(blocks, w), f)
    # arbitrary block data is cut down to its own level set
    F = {k: rng.standard_normal(50) for k in blocks}
    again = lz.embed_blocks(lz.section(F, w), w)
    levels = lz.dyadic_level(w)
    for k in blocks:
        np.testing.assert_array_equal(again[k], np.where(levels == k, F[k], 0.0))


def test_dyadic_level_brackets():
    w = np.array([1.0, 1.999, 2.0, 0.3, 1e-5, 1e6])
    k = lz.dyadic_level(w)
    assert np.all(2.0**k <= w) and np.all(w < 2.0 ** (k + 1))


L1 = SpaceCouple.of(1, 0, 1, 1)


@pytest.mark.parametrize("t", [0.01, 0.5, 1.0, 2.0, 100.0])
def test_k_spike_examples(t):
    assert lz.k_functional(WeightedSequence({0: 1.0}), L1, t) == pytest.approx(min(1, t))
    assert lz.k_functional(WeightedSequence({2: 1.0}), L1, t) == pytest.approx(min(1, 4 * t))


def test_k_l1_matches_grid():
    rng = stream(9, 0)
    for _ in range(10):
        f = lz.random_sequence(rng, size=10)
        couple = SpaceCouple.of(1, 0.3, 1, -0.8)
        w0, w1 = couple.x0.weights(f.indices), couple.x1.weights(f.indices)
        for t in (0.1, 1.0, 7.0):
            ref = k_l1_grid(f.values, w0, w1, t)
            assert lz.k_functional(f, couple, t) == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("couple", [SpaceCouple.of(2, 0, 2, 1), SpaceCouple.of(1, 0, 2, 1), SpaceCouple.of(3, 1, 1.5, -1)])
def test_k_pareto_never_worse_than_optimizer(couple):
    rng = stream(9, 1)
    for _ in range(4):
        f = lz.random_sequence(rng, size=6)
        w0, w1 = couple.x0.weights(f.indices), couple.x1.weights(f.indices)
        for t in (0.2, 1.0, 5.0):
            ours = lz.k_functional(f, couple, t)
            ref = k_optimizer(f.values, w0, w1, couple.x0.p, couple.x1.p, t)
            assert ours <= ref * (1 + 1e-9)
            assert ours >= ref * (1 - 1e-4)


def test_k_identical_endpoints():
    # identical endpoint spaces: the triangle inequality forces K(t) = min(1, t) ||f||
    f = WeightedSequence({0: 3.0, 1: -4.0})
    couple = SpaceCouple.of(2, 0, 2, 0)
    for t in (0.3, 1.0, 2.5):
        assert lz.k_functional(f, couple, t) == pytest.approx(5 * min(1, t), rel=1e-12)


def test_k_vertex_enumeration_quasi_banach():
    f = WeightedSequence({0: 1.0, 1: 2.0, 2: 0.5})
    couple = SpaceCouple.of(0.5, 0, 0.5, 1)
    ks, vals = f.indices, np.abs(f.values)
    t = 0.7
    brute = min(
        couple.x0.norm_of(ks[~np.array(m)], vals[~np.array(m)]) + t * couple.x1.norm_of(ks[np.array(m)], vals[np.array(m)])
        for m in itertools.product((False, True), repeat=3)
    )
    assert lz.k_functional(f, couple, t) == pytest.approx(brute)


def test_k_unsupported_couple():
    with pytest.raises(ArgumentError):
        lz.k_functional(WeightedSequence({0: 1.0}), SpaceCouple.of(0.5, 0, 2, 1), 1.0)


def test_j_examples():
    f = WeightedSequence({0: 1.0})
    for t in (0.1, 1.0, 3.0):
        assert lz.j_functional(f, L1, t) == max(1, t)
    g = WeightedSequence({0: 1.0, 3: -2.0})
    assert lz.j_functional(g, L1, 1e-12) == pytest.approx(L1.x0.norm(g))


@pytest.mark.parametrize("couple", [L1, SpaceCouple.of(2, 0, 2, 1), SpaceCouple.of(1, 0, 2, 1)])
def test_k_below_j_on_ladder(couple):
    rng = stream(2, 4)
    ts = np.exp2(np.arange(-10, 11, dtype=float))
    for _ in range(5):
        f = lz.random_sequence(rng)
        assert np.all(lz.k_functional(f, couple, ts) <= lz.j_functional(f, couple, ts) * (1 + 1e-12))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 100.0), st.floats(0.05, 20.0))
def test_k_homogeneous_and_concave_endpoints(c, t):
    f = WeightedSequence({-1: 0.7, 0: -1.3, 2: 2.0})
    assert lz.k_functional(f.scaled(c), L1, t) == pytest.approx(c * lz.k_functional(f, L1, t), rel=1e-12)
    assert lz.k_functional(f, L1, t) <= min(L1.x0.norm(f), t * L1.x1.norm(f)) + 1e-12


def test_interpolation_norm_zero_and_theta():
    assert lz.interpolation_norm(WeightedSequence({}), L1, 0.5, 2) == 0.0
    with pytest.raises(ArgumentError):
        lz.interpolation_norm(WeightedSequence({0: 1.0}), L1, 1.0, 2)
    with pytest.raises(ArgumentError):
        lz.interpolation_norm(WeightedSequence({0: 1.0}), L1, 0.0, 2)


@pytest.mark.parametrize("k", [-3, 0, 2, 5])
@pytest.mark.parametrize("theta, q", [(0.5, 2.0), (0.3, 1.0), (0.8, 4.0), (0.4, math.inf)])
def test_spike_closed_form(k, theta, q):
    couple = SpaceCouple.of(1, 0.2, 1, 1.3)
    f = WeightedSequence({k: -1.7})
    ours = lz.interpolation_norm(f, couple, theta, q)
    # direct geometric-series sum over a wide window
    ls = np.arange(-200, 201)
    w0, w1 = 2.0 ** (k * 0.2), 2.0 ** (k * 1.3)
    terms = 2.0 ** (-ls * theta) * np.minimum(w0, 2.0**ls * w1)
    ref = 1.7 * (terms.max() if math.isinf(q) else math.fsum(terms**q) ** (1 / q))
    assert ours == pytest.approx(ref, rel=1e-9)
    assert lz.spike_interpolation_norm(-1.7, k, couple, theta, q) == pytest.approx(ref, rel=1e-12)


def test_fixed_space_equivalence_bounded():
    fit = lz.fixed_space_equivalence(L1, 0.5, 2.0, samples=30, seed=1)
    assert fit.s == 0.5
    assert 1 <= fit.constant < 10


def test_fixed_space_requires_distinct_smoothness():
    with pytest.raises(ArgumentError):
        lz.fixed_space_equivalence(SpaceCouple.of(1, 1, 2, 1), 0.5, 2.0)


def test_cwikel_equality_when_q_equals_r():
    chk = lz.cwikel_embedding_check(6, 0, 1, 0, 1, 0.5, 1)
    assert chk.exact_outer
    assert chk.max_ratio == pytest.approx(1.0, rel=1e-8)
    assert chk.min_ratio == pytest.approx(1.0, rel=1e-8)


def test_cwikel_embedding_contractive_for_q_above_r():
    chk = lz.cwikel_embedding_check(6, 0, 1, 0, 1, 0.5, 2)
    assert 0 < chk.min_ratio <= chk.max_ratio <= 1 + 1e-9


def test_cwikel_rejects_q_below_r():
    with pytest.raises(ArgumentError):
        lz.cwikel_embedding_check(2, 0, 2, 0, 1, 0.5, 1)


def test_sequence_space_norm():
    sp = SequenceSpace(2, 1)
    assert sp.norm(WeightedSequence({0: 3.0, 1: 2.0})) == pytest.approx(5.0)
    assert SequenceSpace(math.inf, 0).norm(WeightedSequence({0: 3.0, 5: -4.0})) == 4.0


def test_weighted_sequence_json():
    f = WeightedSequence({3: 1.5, -2: -0.25, 7: 0.0})
    assert WeightedSequence.from_json(f.to_json()) == f
    assert list(f.indices) == [-2, 3]
