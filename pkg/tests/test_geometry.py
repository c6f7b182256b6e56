import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arlab import geometry as geo
from arlab import streams
from arlab.curves import Curve, OffspringSpec
from arlab.errors import ArgumentError, DomainError, PreconditionError

from oracles import leibniz_det, vandermonde_exact


def _jacobian_oracle(c, t):
    # columns gamma'(t_i), cofactor expansion
    from arlab.curves import derivative

    cols = [derivative(c, ti, 1).tolist() for ti in t]
    return leibniz_det([[cols[j][i] for j in range(len(t))] for i in range(len(t))])


def test_jacobian_model_example():
    c = Curve.model(3, interval=(0, 2))
    assert geo.jacobian(c, (0, 1, 2)) == pytest.approx(1.0, rel=1e-14)


def test_jacobian_matches_cofactor_oracle():
    c = Curve.exponential((1, 2, 3))
    t = (0.0, 0.1, 0.2)
    assert geo.jacobian(c, t) == pytest.approx(_jacobian_oracle(c, t), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.permutations([0, 1, 2, 3]), st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4, unique=True))
def test_jacobian_is_alternating(perm, t):
    c = Curve.exponential((0.5, 1.0, 2.0, 3.0))
    t = sorted(t)
    if min(np.diff(t)) < 1e-3:
        return
    sign = round(np.linalg.det(np.eye(4)[list(perm)]))
    permuted = [t[i] for i in perm]
    assert geo.jacobian(c, permuted) == pytest.approx(sign * geo.jacobian(c, t), rel=1e-9)


def test_jacobian_rejects_repeats_and_domain():
    c = Curve.model(3)
    with pytest.raises(ArgumentError):
        geo.jacobian(c, (0.1, 0.1, 0.5))
    with pytest.raises(DomainError):
        geo.jacobian(c, (0.1, 0.2, 1.5))
    with pytest.raises(ArgumentError):
        geo.SimplexSample((0.3, 0.2, 0.5))


def test_jacobian_bound_model_ratio_is_constant():
    # for the model curve |J| = V(t) / 2
    rep = geo.check_jacobian_bound(Curve.model(3), 2000, seed=1)
    assert rep.minimum == pytest.approx(0.5, rel=1e-10)
    assert rep.maximum == pytest.approx(0.5, rel=1e-10)
    assert rep.variance < 1e-16
    assert rep.histogram_csv().startswith("bin_lo,bin_hi,count\n")


def test_jacobian_bound_degenerate_family():
    rep = geo.check_jacobian_bound(Curve.simple_poly((1, 2, 3), 3), 100, seed=1)
    assert rep.status == "degenerate family"


def test_jacobian_bound_exponential_positive():
    rep = geo.check_jacobian_bound(Curve.exponential((1, 2, 3)), 10**5, seed=3)
    assert rep.status == "ok"
    assert rep.minimum > 0
    assert rep.used == 10**5


def test_offspring_exponential_ratio_at_least_one():
    c = Curve.exponential((1, 2, 3))
    res = geo.check_offspring_torsion(c, OffspringSpec((-0.1, 0, 0.2)), np.linspace(0.1, 0.8, 100))
    assert res.min_ratio >= 1.0
    assert res.evaluated == 100 and res.skipped == 0


def test_offspring_simple_quartic_bound():
    c = Curve.simple_poly((0, 0, 0, 0, 1), 3, interval=(0, 5))
    res = geo.check_offspring_torsion(c, OffspringSpec((0, 0.1, 0.3)), np.linspace(0.01, 4.5, 100))
    assert res.min_ratio >= 9.0


@pytest.mark.parametrize("d", [3, 4, 5])
def test_offspring_zero_kappa_gives_d_to_the_d(d):
    coeffs = [0] * d + [1, 0.5]
    c = Curve.simple_poly(coeffs, d, interval=(0, 2))
    res = geo.check_offspring_torsion(c, OffspringSpec((0,) * d), np.linspace(0.1, 1.9, 7))
    assert res.min_ratio == pytest.approx(d**d, rel=1e-10)


def test_offspring_empty_grid():
    with pytest.raises(ArgumentError):
        geo.check_offspring_torsion(Curve.model(3), OffspringSpec((0, 0.1, 0.2)), [])


def test_offspring_skips_zero_parent():
    c = Curve.simple_poly((1, 2, 3), 3)
    res = geo.check_offspring_torsion(c, OffspringSpec((0, 0.1, 0.2)), np.linspace(-0.5, 0.5, 5))
    assert res.skipped == 5 and math.isnan(res.min_ratio)


def test_multiplicity_model_and_degenerate():
    assert geo.multiplicity_probe(Curve.model(3), 10**4, 0, 1e-9).flag == geo.NO_COLLISION
    rep = geo.multiplicity_probe(Curve.monomial((2, 2, 2)), 200, 0, 1e-9)
    assert rep.flag == geo.COLLISION
    s, s2 = rep.witness
    c = Curve.monomial((2, 2, 2))
    assert np.allclose(geo.sum_map(c, s), geo.sum_map(c, s2), atol=1e-8)


def test_multiplicity_rejects_zero_tol():
    with pytest.raises(ArgumentError):
        geo.multiplicity_probe(Curve.model(3), 10, 0, 0.0)


def test_sublevel_extremes():
    est, se = geo.vandermonde_sublevel_measure(3, 1e9, 1.0, 10**4, 0)
    assert est == 4.0 and se == 0.0
    est, _ = geo.vandermonde_sublevel_measure(4, 1e9, 0.5, 10**4, 0)
    assert est == pytest.approx(1.0)
    assert geo.vandermonde_sublevel_measure(3, 0.0, 1.0, 10**4, 0) == (0.0, 0.0)


def test_sublevel_ladder_monotone():
    alphas = np.logspace(-4, 0, 9)
    est, se = geo.vandermonde_sublevel_ladder(3, alphas, 1.0, 10**5, 7)
    assert np.all(np.diff(est) >= 0)
    assert np.all(se >= 0)


def test_sublevel_slope_near_two_thirds():
    fit = geo.sublevel_slope_fit(3, n_mc=10**6, seed=0)
    assert abs(fit.slope - 2 / 3) < 0.1
    assert fit.monotone
    assert fit.to_csv().splitlines()[0].startswith("alpha")


@pytest.mark.parametrize("eps", [0.1, 0.25, 0.49])
def test_poly_sublevel_linear_below_half(eps):
    # {t in (1,2): t < 2 eps} is empty for eps < 1/2
    res = geo.polynomial_sublevel_check([0, 1], 1, 2, eps)
    assert res.measured == 0.0
    assert res.holds


@pytest.mark.parametrize("c, a, b, delta", [(0.0, 0.5, 3.0, 0.3), (-1.0, 0.0, 1.0, 0.2), (2.0, -1.0, 1.5, 0.45)])
def test_poly_sublevel_linear_two_delta(c, a, b, delta):
    res = geo.polynomial_sublevel_check([-c, 1], a, b, delta)
    # direct interval arithmetic
    lo, hi = max(a, c - delta * abs(b - c)), min(b, c + delta * abs(b - c))
    assert res.measured == pytest.approx(max(0.0, hi - lo), abs=1e-12)
    assert res.measured <= 2 * delta * (b - a)


def test_poly_sublevel_quartic_against_dense_grid():
    p = [0.3, -1.2, 2.0, -0.5, 1.0]
    eps = 1e-2
    res = geo.polynomial_sublevel_check(p, 0, 1, eps)
    t = np.linspace(0, 1, 2_000_001)
    v = np.polynomial.polynomial.polyval(t, p)
    grid = np.mean(np.abs(v) < eps * abs(np.polynomial.polynomial.polyval(1.0, p)))
    assert res.measured == pytest.approx(grid, abs=2e-6)
    assert res.measured <= 8 * 1e-4 ** (1 / 8)


def test_poly_sublevel_errors():
    with pytest.raises(PreconditionError):
        geo.polynomial_sublevel_check([-0.5, 1], 0, 1, 0.1)
    with pytest.raises(ArgumentError):
        geo.polynomial_sublevel_check([1, 1], 0, 1, 0.6)
    with pytest.raises(ArgumentError):
        geo.polynomial_sublevel_check([1, 1], 0, 1, 0.0)


def test_psi_mass_for_cubic():
    rep = geo.psi_kernel_checks([0, 0, 0, 1 / 6], (0, 0.5, 2), n_mc=10**5, seed=0)
    assert rep.psi_mass_target == pytest.approx(0.75)
    assert rep.mass_discrepancy < 4 * rep.psi_mass_se


def test_psi_low_degree_is_zero():
    rep = geo.psi_kernel_checks([1, 2, 3], (0, 0.5, 2), n_mc=10**4, seed=0)
    assert rep.direct == pytest.approx(0.0, abs=1e-14)
    assert rep.integral == 0.0


def test_psi_quartic_identity():
    rep = geo.psi_kernel_checks([0, 0, 0, 0, 1], (0, 1, 2), n_mc=10**5, seed=0)
    assert rep.identity_discrepancy <= 0.01 * abs(rep.direct)
    assert rep.bound_violations == 0


def test_psi_d3_closed_form_kernel():
    s = (0.0, 0.7, 2.0)
    rep = geo.psi_kernel_checks([0, 0, 0, 1], s, n_mc=2 * 10**5, seed=4)
    exact = np.array([geo.psi_exact_d3(u, s) for u in rep.nodes])
    assert np.all(np.abs(np.array(rep.psi) - exact) <= 5 * np.array(rep.psi_se) + 1e-12)


def test_sign_intervals():
    got = geo.sign_interval_decomposition([0, 0, 0, 0, 1], 3)
    assert got.intervals == [(-math.inf, 0.0), (0.0, math.inf)]
    assert geo.sign_interval_decomposition([0, 0, 0, 5], 3).intervals == [(-math.inf, math.inf)]
    got = geo.sign_interval_decomposition([0, 0, 0, 0, -1, 0, 1], 3)
    # phi''' = 120 t^3 - 24 t and phi'''' = 360 t^2 - 24
    roots = sorted([0.0, -math.sqrt(0.2), math.sqrt(0.2), -math.sqrt(1 / 15), math.sqrt(1 / 15)])
    edges = [lo for lo, _ in got.intervals[1:]]
    np.testing.assert_allclose(edges, roots, atol=1e-11)


def test_sign_intervals_degenerate():
    assert geo.sign_interval_decomposition([1, 2, 3], 3).degenerate


@pytest.mark.parametrize("t, expected", [((0, 1), 0), ((0, 0.3), 1), ((0, 1, 2), -1), ((0, 0.5, 1.5), 0), ((0, 0.25, 0.5), 5)])
def test_dyadic_cell_index(t, expected):
    assert geo.dyadic_cell_index(t) == expected


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(-4, 4, max_denominator=64), min_size=2, max_size=5, unique=True))
def test_dyadic_cell_index_brackets(t):
    t = sorted(t)
    v = abs(vandermonde_exact(t))
    l = geo.dyadic_cell_index([float(x) for x in t])
    assert Fraction(2) ** (-l - 1) < v <= Fraction(2) ** (-l)


def test_dyadic_cell_index_rejects_repeats():
    with pytest.raises(ArgumentError):
        geo.dyadic_cell_index((0.2, 0.2, 1.0))


@pytest.mark.parametrize("threads", ["1", "3", "8"])
def test_monte_carlo_independent_of_thread_count(monkeypatch, threads):
    monkeypatch.setenv("ARL_THREADS", "1")
    ref = geo.vandermonde_sublevel_ladder(3, [1e-3, 1e-2, 1e-1], 1.0, 3 * streams.CHUNK + 17, 11)
    monkeypatch.setenv("ARL_THREADS", threads)
    got = geo.vandermonde_sublevel_ladder(3, [1e-3, 1e-2, 1e-1], 1.0, 3 * streams.CHUNK + 17, 11)
    np.testing.assert_array_equal(ref[0], got[0])
    rep = geo.check_jacobian_bound(Curve.exponential((1, 2, 3)), 2 * streams.CHUNK + 5, 2)
    monkeypatch.setenv("ARL_THREADS", "1")
    assert rep == geo.check_jacobian_bound(Curve.exponential((1, 2, 3)), 2 * streams.CHUNK + 5, 2)


def test_hypothesis_report_json():
    rep = geo.hypothesis_report(Curve.exponential((1, 2, 3)), (-0.1, 0, 0.2), 2000, 5)
    assert rep.c2_estimate >= 1.0
    assert rep.c1_estimate > 0
    assert '"multiplicity_flag"' in rep.to_json()
