"""Exact rational polynomials with Sturm-sequence root isolation.

Polynomials are lists of :class:`fractions.Fraction` coefficients, lowest
degree first, with no trailing zeros (the zero polynomial is ``[]``).
Floating inputs are snapped to the rational they represent exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import ArgumentError


def rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise ArgumentError(f"cannot snap non-finite value {x} to a rational")
    return Fraction(x)


def make(coeffs) -> list[Fraction]:
    p = [rational(c) for c in coeffs]
    return trim(p)


def trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def degree(p) -> int:
    return len(p) - 1


def evaluate(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def derivative(p, k: int = 1):
    for _ in range(k):
        p = [i * c for i, c in enumerate(p)][1:]
    return trim(p)


def add(p, q):
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def scale(p, a):
    return trim([a * c for c in p])


def sub(p, q):
    return add(p, scale(q, -1))


def mul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return trim(out)


def divmod_(p, q):
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    quo = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    lead = q[-1]
    while len(rem) >= len(q) and rem:
        shift = len(rem) - len(q)
        c = rem[-1] / lead
        quo[shift] = c
        for i, b in enumerate(q):
            rem[shift + i] -= c * b
        rem = trim(rem[:-1]) if rem[-1] == 0 else trim(rem)
    return trim(quo), trim(rem)


def monic(p):
    return scale(p, 1 / p[-1]) if p else []


def gcd(p, q):
    while q:
        p, q = q, divmod_(p, q)[1]
    return monic(p)


def squarefree(p):
    """p / gcd(p, p'): same real roots, all simple."""
    if degree(p) < 1:
        return p
    g = gcd(p, derivative(p))
    return divmod_(p, g)[0] if degree(g) > 0 else p


def sturm_chain(p):
    chain = [p, derivative(p)]
    while chain[-1] and degree(chain[-1]) > 0:
        r = divmod_(chain[-2], chain[-1])[1]
        if not r:
            break
        # divide by |lead| only; signs must be preserved
        chain.append(scale(r, -1 / abs(r[-1])))
    return chain


def _sign_changes(values) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(chain, a, b) -> int:
    """Distinct real roots of chain[0] in the half-open interval (a, b]."""
    return _sign_changes([evaluate(s, a) for s in chain]) - _sign_changes([evaluate(s, b) for s in chain])


def cauchy_bound(p) -> Fraction:
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def isolate_roots(p, a, b, tol=Fraction(1, 10**13)) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals (lo, hi], each holding exactly one distinct root of p in (a, b].

    Every interval is refined to width <= tol. A root sitting exactly on a
    dyadic split point is returned as the degenerate interval (x, x).
    """
    p = trim(p)
    if degree(p) < 1:
        if not p:
            raise ArgumentError("the zero polynomial has no isolated roots")
        return []
    sf = squarefree(p)
    chain = sturm_chain(sf)
    a, b, tol = rational(a), rational(b), rational(tol)
    out = []
    stack = [(a, b, count_roots(chain, a, b))]
    while stack:
        lo, hi, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            out.append(_refine(sf, lo, hi, tol))
            continue
        mid = (lo + hi) / 2
        stack.append((mid, hi, count_roots(chain, mid, hi)))
        stack.append((lo, mid, count_roots(chain, lo, mid)))
    return sorted(out)


def _refine(sf, lo, hi, tol):
    """Bisect (lo, hi] holding one simple root of the square-free ``sf``."""
    if evaluate(sf, hi) == 0:
        return (hi, hi)
    s_hi = evaluate(sf, hi) > 0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        v = evaluate(sf, mid)
        if v == 0:
            return (mid, mid)
        if (v > 0) == s_hi:
            hi = mid
        else:
            lo = mid
    return (lo, hi)


def real_roots(p, tol=Fraction(1, 10**13)) -> list[Fraction]:
    """All distinct real roots, as midpoints of isolating intervals of width <= tol."""
    p = trim(p)
    if degree(p) < 1:
        return []
    bound = cauchy_bound(p)
    return [(lo + hi) / 2 for lo, hi in isolate_roots(p, -bound, bound, tol)]


def has_root_in_open(p, a, b) -> bool:
    """True when p vanishes somewhere in the open interval (a, b)."""
    p = trim(p)
    if degree(p) < 1:
        return not p
    sf = squarefree(p)
    chain = sturm_chain(sf)
    a, b = rational(a), rational(b)
    n = count_roots(chain, a, b)
    if evaluate(sf, b) == 0:
        n -= 1
    return n > 0


def real_roots_in(p, a, b, tol=Fraction(1, 10**13)) -> list[Fraction]:
    """Distinct real roots in (a, b], as midpoints of isolating intervals of width <= tol."""
    p = trim(p)
    if degree(p) < 1:
        return []
    return [(lo + hi) / 2 for lo, hi in isolate_roots(p, a, b, tol)]
