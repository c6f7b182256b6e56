import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arlab import curves as cv
from arlab.curves import Curve, OffspringSpec
from arlab.errors import ArgumentError, DomainError

from oracles import leibniz_det, symbolic_derivative, symbolic_torsion


@pytest.mark.parametrize(
    "curve, t, j, expected",
    [
        (Curve.model(3), 0.0, 3, [0, 0, 1]),
        # d/dt of e^(bt)/b is e^(bt), which is 1 at t = 0
        (Curve.exponential((1, 2, 3)), 0.0, 1, [1, 1, 1]),
        (Curve.monomial((1, 2, 4)), 2.0, 2, [0, 2, 48]),
    ],
)
def test_derivative_examples(curve, t, j, expected):
    np.testing.assert_allclose(cv.derivative(curve, t, j), expected, rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize(
    "curve",
    [
        Curve.model(4),
        Curve.exponential((0.5, -1.0, 2.0)),
        Curve.monomial((1.5, 2.0, 3.5), interval=(0.5, 3.0)),
        Curve.simple_poly((0.2, -1, 0.5, 1, 0.3), 3),
    ],
)
@pytest.mark.parametrize("j", [1, 2, 3])
def test_derivative_matches_symbolic(curve, j):
    lo, hi = curve.interval
    for t in np.linspace(lo, hi, 5):
        ref = symbolic_derivative(curve.family, curve.params, curve.dim, t, j)
        np.testing.assert_allclose(cv.derivative(curve, t, j), ref, rtol=1e-12, atol=1e-12)


def test_torsion_examples():
    assert cv.torsion(Curve.exponential((1, 2, 3)), 0.0) == pytest.approx(2.0, rel=1e-14)
    for t in (-1.0, 0.0, 0.7):
        assert cv.torsion(Curve.model(3), t) == pytest.approx(1.0, rel=1e-14)
    # prod(a) V(a) t^(sum a - 6) = 8 * 6 * 2
    m = Curve.monomial((1, 2, 4))
    assert cv.torsion(m, 2.0) == pytest.approx(96.0, rel=1e-13)
    assert cv.torsion_closed_form(m, 2.0) == pytest.approx(symbolic_torsion("monomial", (1, 2, 4), 3, 2.0))


@pytest.mark.parametrize(
    "curve",
    [
        Curve.exponential((1, 2, 3)),
        Curve.exponential((-0.7, 0.4, 1.1, 2.5), interval=(-1, 1)),
        Curve.monomial((1, 2, 4)),
        Curve.monomial((0.5, 1.5, 2.5, 4.0), interval=(0.3, 2.0)),
        Curve.simple_poly((0, 0, 0, 1, 2, -1), 3),
        Curve.simple_poly((1, 0, 0, 0, 0.5, 0, 0.1), 4),
        Curve.model(5),
    ],
)
def test_torsion_against_symbolic_determinant(curve):
    lo, hi = curve.interval
    for t in np.linspace(lo, hi, 7):
        ref = symbolic_torsion(curve.family, curve.params, curve.dim, t)
        assert cv.torsion(curve, t) == pytest.approx(ref, rel=1e-10, abs=1e-12)
        assert cv.torsion_closed_form(curve, t) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_torsion_leibniz_on_derivative_matrix():
    c = Curve.exponential((0.3, 1.2, -0.8, 2.0))
    m = cv.derivative_matrix(c, 0.4)
    assert cv.torsion(c, 0.4) == pytest.approx(leibniz_det(m.tolist()), rel=1e-12)


def test_affine_weight_examples():
    assert cv.affine_weight(Curve.model(3), 0.5) == 1.0
    assert cv.affine_weight(Curve.model(3), -1.0) == 1.0
    deg2 = Curve.simple_poly((1, 2, 3), 3)
    np.testing.assert_array_equal(cv.affine_weight(deg2, np.linspace(-1, 1, 9)), 0.0)
    assert cv.affine_weight(Curve.exponential((1, 2, 3)), 1.0) == pytest.approx((2 * math.e**6) ** (1 / 6), rel=1e-13)


def test_weight_exponent():
    assert cv.weight_exponent(3) == pytest.approx(1 / 6)
    assert cv.weight_exponent(4) == pytest.approx(1 / 10)


@settings(max_examples=40, deadline=None)
@given(
    a=st.lists(st.floats(0.2, 4.0), min_size=3, max_size=4, unique=True).filter(
        lambda a: min(abs(x - y) for i, x in enumerate(a) for y in a[i + 1:]) > 0.05
    ),
    s=st.floats(-1.0, 1.0),
)
def test_reparametrization_monomial_to_exponential(a, s):
    # gamma_a(e^s) is the exponential curve with b = a up to the diagonal factor diag(b)
    a = sorted(a)
    d = len(a)
    mono = Curve.monomial(a, interval=(math.exp(-1.0), math.exp(1.0)))
    expo = Curve.exponential(a, interval=(-1.0, 1.0))
    lhs = cv.torsion(expo, s)
    rhs = cv.torsion(mono, math.exp(s)) * math.exp(s) ** (d * (d + 1) / 2) / math.prod(a)
    assert lhs == pytest.approx(rhs, rel=1e-9)
    # the weight picks up phi'(s) = e^s and the constant prod(a)^(-2/(d^2+d))
    w_ratio = cv.affine_weight(expo, s) / (cv.affine_weight(mono, math.exp(s)) * math.exp(s))
    assert w_ratio == pytest.approx(math.prod(a) ** (-2 / (d * d + d)), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(
    m=st.lists(st.floats(-2, 2), min_size=9, max_size=9),
    t=st.floats(-1, 1),
)
def test_affine_image_multiplies_torsion_by_det(m, t):
    M = np.array(m).reshape(3, 3)
    c = Curve.exponential((1.0, -0.5, 2.0), interval=(-1, 1))
    D = cv.derivative_matrix(c, t)
    assert np.linalg.det(M @ D) == pytest.approx(np.linalg.det(M) * cv.torsion(c, t), rel=1e-8, abs=1e-9)


@pytest.mark.parametrize(
    "curve",
    [Curve.model(3), Curve.exponential((1, 2, 3)), Curve.monomial((1, 2, 4)), Curve.simple_poly((1, -2, 0.5, 3), 3)],
)
def test_json_round_trip(curve):
    back = Curve.from_json(curve.to_json())
    assert back == curve
    assert set(curve.to_dict()) == {"family", "params", "interval", "dim"}


def test_domain_and_argument_errors():
    c = Curve.model(3)
    with pytest.raises(DomainError):
        cv.derivative(c, 1.5, 1)
    with pytest.raises(ArgumentError):
        cv.derivative(c, 0.0, 0)
    with pytest.raises(ArgumentError):
        cv.derivative(c, 0.0, 4)
    with pytest.raises(DomainError):
        cv.torsion(Curve.monomial((1, 2, 4)), 0.5)
    # the closed interval is accepted
    assert cv.torsion(c, 1.0) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family="spiral", params=(), interval=(0, 1), dim=3),
        dict(family="monomial", params=(1, 2), interval=(1, 2), dim=3),
        dict(family="monomial", params=(1, 2, 3), interval=(0, 2), dim=3),
        dict(family="exponential", params=(1, 0, 3), interval=(0, 1), dim=3),
        dict(family="model", params=(), interval=(1, 1), dim=3),
        dict(family="model", params=(), interval=(0, 1), dim=1),
    ],
)
def test_invalid_curves(kwargs):
    with pytest.raises(ArgumentError):
        Curve(**kwargs)


def test_offspring_model_curve():
    c = Curve.model(3)
    o = cv.offspring_curve(c, OffspringSpec((0, 0.1, 0.2)))
    # sum of three copies of the model frame: d^d times the parent torsion
    assert o.torsion(0.1) == pytest.approx(27.0, rel=1e-12)
    with pytest.raises(DomainError):
        o.torsion(0.9)


def test_offspring_kappa_zero_gives_d_to_the_d():
    c = Curve.exponential((1, 2, 3))
    o = cv.offspring_curve(c, OffspringSpec((0, 0, 0)))
    assert o.torsion(0.3) == pytest.approx(27 * cv.torsion(c, 0.3), rel=1e-12)


@pytest.mark.parametrize(
    "curve, kappa",
    [
        (Curve.exponential((0.5, 1.0, 2.5)), (-0.2, 0.0, 0.3)),
        (Curve.exponential((-1.0, 0.3, 0.9, 1.7)), (0.0, 0.1, 0.25, 0.4)),
        (Curve.simple_poly((0, 0, 0, 1, 0.5), 3), (-0.3, 0.0, 0.4)),
    ],
)
def test_offspring_closed_form(curve, kappa):
    o = cv.offspring_curve(curve, OffspringSpec(kappa))
    lo, hi = o.domain
    for t in np.linspace(lo, hi, 6):
        assert o.torsion(t) == pytest.approx(o.torsion_closed_form(t), rel=1e-10)


@pytest.mark.parametrize("kappa", [(0.1, 0.2, 0.3), (0.2, 0.0, 0.1), (0.0,)])
def test_offspring_spec_validation(kappa):
    with pytest.raises(ArgumentError):
        OffspringSpec(kappa)
