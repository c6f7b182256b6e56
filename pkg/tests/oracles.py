"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import sympy as sp
from scipy.optimize import minimize


def leibniz_det(m):
    """Permutation-sum determinant, exact on Fractions."""
    n = len(m)
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = -1 if inv % 2 else 1
        for i in range(n):
            term *= m[i][perm[i]]
        total += term
    return total


T = sp.Symbol("t", real=True)


def symbolic_gamma(family: str, params, dim: int):
    if family == "model":
        return [T**j / sp.factorial(j) for j in range(1, dim + 1)]
    if family == "monomial":
        return [T ** sp.nsimplify(a) for a in params]
    if family == "exponential":
        return [sp.exp(sp.nsimplify(b) * T) / sp.nsimplify(b) for b in params]
    if family == "simple_poly":
        head = [T**j / sp.factorial(j) for j in range(1, dim)]
        return head + [sum(sp.nsimplify(c) * T**k for k, c in enumerate(params))]
    raise ValueError(family)


def symbolic_torsion(family: str, params, dim: int, t: float) -> float:
    g = symbolic_gamma(family, params, dim)
    rows = [[sp.diff(gi, T, j) for j in range(1, dim + 1)] for gi in g]
    return float(sp.Matrix(rows).det().subs(T, sp.nsimplify(t)).evalf(30))


def symbolic_derivative(family: str, params, dim: int, t: float, j: int) -> list:
    g = symbolic_gamma(family, params, dim)
    return [float(sp.diff(gi, T, j).subs(T, sp.nsimplify(t)).evalf(30)) for gi in g]


def k_l1_grid(values, w0, w1, t, n=2001) -> float:
    """Brute-force K for an l^1 couple: minimize every entry's split over a grid."""
    total = 0.0
    lam = np.linspace(0.0, 1.0, n)
    for f, a, b in zip(values, w0, w1):
        total += float(np.min(a * np.abs(f) * (1 - lam) + t * b * np.abs(f) * lam))
    return total


def k_optimizer(values, w0, w1, p0, p1, t) -> float:
    """K(t) = inf ||f0||_p0 + t ||f1||_p1 by L-BFGS-B over the split fraction per entry."""
    f = np.abs(np.asarray(values, dtype=float))
    w0, w1 = np.asarray(w0, dtype=float), np.asarray(w1, dtype=float)

    def obj(lam):
        a = w0 * f * (1 - lam)
        b = w1 * f * lam
        return np.sum(a**p0) ** (1 / p0) + t * np.sum(b**p1) ** (1 / p1)

    best = min(obj(np.zeros(f.size)), obj(np.ones(f.size)))
    for start in (0.25, 0.5, 0.75):
        r = minimize(obj, np.full(f.size, start), method="L-BFGS-B", bounds=[(0, 1)] * f.size)
        best = min(best, float(r.fun))
    return best


def gaussian_weak_norm(Q: float, d: int) -> float:
    """sup_a a |{x in R^d: e^(-|x|^2) > a}|^(1/Q) by scalar maximization on a fine grid."""
    omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    a = np.linspace(1e-6, 1 - 1e-9, 200001)
    r = np.sqrt(-np.log(a))
    return float(np.max(a * (omega * r**d) ** (1 / Q)))


def vandermonde_exact(xs) -> Fraction:
    out = Fraction(1)
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            out *= Fraction(xs[j]) - Fraction(xs[i])
    return out
