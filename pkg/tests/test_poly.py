from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arlab import poly
from arlab.errors import ArgumentError


def test_arithmetic_roundtrip():
    p = poly.make([1, -3, 0, 2])
    q = poly.make([Fraction(1, 2), 1])
    quot, rem = poly.divmod_(p, q)
    assert poly.add(poly.mul(quot, q), rem) == p
    assert poly.degree(rem) < poly.degree(q)
    assert poly.derivative(p) == [-3, 0, 6]
    assert poly.evaluate(p, Fraction(1, 2)) == Fraction(1) - Fraction(3, 2) + Fraction(1, 4)


def test_float_snapping_is_exact():
    assert poly.rational(0.1) == Fraction(0.1)
    with pytest.raises(ArgumentError):
        poly.rational(float("nan"))


@pytest.mark.parametrize(
    "roots",
    [[Fraction(1, 3)], [-2, 0, Fraction(5, 7)], [Fraction(-1, 10), Fraction(1, 10), 3, 4]],
)
def test_real_roots_of_products(roots):
    p = [Fraction(1)]
    for r in roots:
        p = poly.mul(p, [-Fraction(r), 1])
    got = poly.real_roots(p)
    assert len(got) == len(roots)
    for g, r in zip(got, sorted(roots)):
        assert abs(g - r) < Fraction(1, 10**12)


def test_repeated_roots_counted_once():
    p = poly.mul(poly.mul([-1, 1], [-1, 1]), [2, 1])  # (t-1)^2 (t+2)
    assert len(poly.real_roots(p)) == 2


def test_no_real_roots():
    assert poly.real_roots([1, 0, 1]) == []


def test_root_in_open_interval():
    p = [-1, 0, 1]  # roots at -1 and 1
    assert not poly.has_root_in_open(p, -1, 1)
    assert poly.has_root_in_open(p, 0, 2)
    assert not poly.has_root_in_open(p, 1, 3)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=2, max_size=7).filter(lambda c: c[-1] != 0))
def test_roots_agree_with_numpy(coeffs):
    ours = [float(r) for r in poly.real_roots(poly.make(coeffs))]
    ref = np.roots(coeffs[::-1])
    ref = sorted({round(float(z.real), 6) for z in ref if abs(z.imag) < 1e-7})
    # numpy merges clustered roots poorly; every numpy root must be near one of ours
    for r in ref:
        assert min(abs(r - x) for x in ours) < 1e-3
    for x in ours:
        assert abs(np.polyval(coeffs[::-1], x)) < 1e-6 * max(1, max(map(abs, coeffs))) * (1 + abs(x)) ** len(coeffs)
