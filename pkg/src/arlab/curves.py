"""Curve families, closed-form derivatives, torsion and affine arclength weight.

Four families are supported, all parametrized on a closed interval:

* ``monomial``     gamma(t) = (t^a_1, ..., t^a_d), t > 0
* ``simple_poly``  gamma(t) = (t, t^2/2!, ..., t^(d-1)/(d-1)!, P_b(t))
* ``exponential``  gamma(t) = (e^(b_1 t)/b_1, ..., e^(b_d t)/b_d), b_i != 0
* ``model``        gamma(t) = (t, t^2/2!, ..., t^d/d!)

Every evaluator accepts a scalar or an array of parameters; vector-valued
results carry the curve coordinates on the last axis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ArgumentError, DomainError
from .linalg import Determinant, det, det_detail, vandermonde

FAMILIES = ("monomial", "simple_poly", "exponential", "model")


def weight_exponent(d: int) -> Fraction:
    """The exact exponent 2/(d^2+d) of the affine arclength weight."""
    return Fraction(2, d * d + d)


@dataclass(frozen=True)
class Curve:
    family: str
    params: tuple = ()
    interval: tuple = (0.0, 1.0)
    dim: int = 3

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ArgumentError(f"unknown curve family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "params", tuple(float(x) for x in self.params))
        lo, hi = (float(x) for x in self.interval)
        object.__setattr__(self, "interval", (lo, hi))
        d = int(self.dim)
        object.__setattr__(self, "dim", d)
        if d < 2:
            raise ArgumentError(f"dimension must be >= 2, got {d}")
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ArgumentError(f"interval must be finite with lo < hi, got {self.interval}")
        if self.family in ("monomial", "exponential") and len(self.params) != d:
            raise ArgumentError(f"{self.family} curve needs {d} exponents, got {len(self.params)}")
        if self.family == "monomial" and lo <= 0:
            raise ArgumentError("monomial curves live on (0, inf); interval must have lo > 0")
        if self.family == "exponential" and any(b == 0 for b in self.params):
            raise ArgumentError("exponential curve requires all b_i != 0")
        if self.family == "simple_poly" and len(self.params) == 0:
            raise ArgumentError("simple_poly curve needs at least one coefficient")
        if self.family == "model" and self.params:
            raise ArgumentError("model curve takes no parameters")

    @classmethod
    def monomial(cls, a, interval=(1.0, 2.0)):
        return cls("monomial", tuple(a), interval, len(a))

    @classmethod
    def simple_poly(cls, coeffs, dim, interval=(-1.0, 1.0)):
        """Simple-type curve; ``coeffs`` are b_0..b_N of P_b, lowest degree first."""
        return cls("simple_poly", tuple(coeffs), interval, dim)

    @classmethod
    def exponential(cls, b, interval=(0.0, 1.0)):
        return cls("exponential", tuple(b), interval, len(b))

    @classmethod
    def model(cls, dim, interval=(-1.0, 1.0)):
        return cls("model", (), interval, dim)

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": [float(x) for x in self.params],
            "interval": [self.interval[0], self.interval[1]],
            "dim": self.dim,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, obj: dict) -> "Curve":
        try:
            return cls(obj["family"], tuple(obj.get("params", ())), tuple(obj["interval"]), int(obj["dim"]))
        except (KeyError, TypeError) as exc:
            raise ArgumentError(f"malformed curve object: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "Curve":
        return cls.from_dict(json.loads(text))


def check_domain(c: Curve, t, interval=None):
    lo, hi = c.interval if interval is None else interval
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)) or np.any(t < lo) or np.any(t > hi):
        raise DomainError(f"parameter outside [{lo}, {hi}]")
    return t


def _check_order(c: Curve, j: int):
    if not (1 <= j <= c.dim):
        raise ArgumentError(f"derivative order must be in 1..{c.dim}, got {j}")


def _falling(a: float, j: int) -> float:
    out = 1.0
    for k in range(j):
        out *= a - k
    return out


def _poly_deriv(coeffs, j: int, t):
    cj = npoly.polyder(np.asarray(coeffs, dtype=float), j) if j else np.asarray(coeffs, dtype=float)
    return npoly.polyval(t, cj)


def _model_rows(t, j: int, rows: int):
    # component i (1-based) of the j-th derivative of (t, t^2/2!, ...) is t^(i-j)/(i-j)!
    out = []
    for i in range(1, rows + 1):
        k = i - j
        if k < 0:
            out.append(np.zeros_like(t))
        else:
            out.append(t**k / math.factorial(k))
    return out


def _eval(c: Curve, t, j: int):
    """j-th derivative (j = 0 is the position) without domain checks."""
    t = np.asarray(t, dtype=float)
    d = c.dim
    if c.family == "model":
        comps = _model_rows(t, j, d)
    elif c.family == "simple_poly":
        comps = _model_rows(t, j, d - 1) + [_poly_deriv(c.params, j, t)]
    elif c.family == "monomial":
        logt = np.log(t)
        comps = [_falling(a, j) * np.exp((a - j) * logt) for a in c.params]
    else:
        comps = [b ** (j - 1) * np.exp(b * t) for b in c.params]
    return np.stack(comps, axis=-1)


def position(c: Curve, t):
    """gamma(t)."""
    t = check_domain(c, t)
    return _eval(c, t, 0)


def derivative(c: Curve, t, j: int):
    """gamma^(j)(t) from closed-form formulas, 1 <= j <= d."""
    _check_order(c, j)
    t = check_domain(c, t)
    return _eval(c, t, j)


def phi_derivative(c: Curve, t, j: int):
    """Any-order derivative of the last coordinate P_b of a simple-type curve."""
    if c.family not in ("simple_poly", "model"):
        raise ArgumentError("phi_derivative is only defined for simple-type curves")
    if j < 0:
        raise ArgumentError("derivative order must be nonnegative")
    t = check_domain(c, t)
    if c.family == "model":
        k = c.dim - j
        return t**k / math.factorial(k) if k >= 0 else np.zeros_like(t)
    return _poly_deriv(c.params, j, t)


def derivative_matrix(c: Curve, t):
    """Matrix with columns gamma'(t), ..., gamma^(d)(t); shape (..., d, d)."""
    t = check_domain(c, t)
    return _derivative_matrix(c, t)


def _derivative_matrix(c: Curve, t):
    return np.stack([_eval(c, t, j) for j in range(1, c.dim + 1)], axis=-1)


def torsion(c: Curve, t):
    """tau(t) = det(gamma'(t), ..., gamma^(d)(t)) via pivoted LU."""
    m = derivative_matrix(c, t)
    out = det(m)
    return float(out) if np.ndim(out) == 0 else out


def torsion_detail(c: Curve, t: float) -> Determinant:
    """Scalar torsion with the numerical-degeneracy flag attached."""
    return det_detail(derivative_matrix(c, float(t)))


def torsion_closed_form(c: Curve, t):
    """Signed torsion from the per-family closed form.

    For monomial curves the derivative matrix factors as diag(t^a_i) times the
    falling-factorial matrix times diag(t^-j), whose determinant reduces by
    column operations to prod(a_i) * V(a).
    """
    t = check_domain(c, t)
    d = c.dim
    if c.family == "model":
        out = np.ones_like(t)
    elif c.family == "simple_poly":
        out = _poly_deriv(c.params, d, t)
    elif c.family == "exponential":
        b = np.asarray(c.params)
        out = vandermonde(b) * np.exp(t * b.sum())
    else:
        a = np.asarray(c.params)
        out = np.prod(a) * vandermonde(a) * np.exp((a.sum() - d * (d + 1) / 2) * np.log(t))
    return float(out) if np.ndim(out) == 0 else out


def _weight_from_torsion(tau, d: int):
    e = weight_exponent(d)
    return np.abs(tau) ** (e.numerator / e.denominator)


def affine_weight(c: Curve, t):
    """w(t) = |tau(t)|^(2/(d^2+d))."""
    out = _weight_from_torsion(torsion(c, t), c.dim)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# offspring curves


@dataclass(frozen=True)
class OffspringSpec:
    kappa: tuple

    def __post_init__(self):
        k = tuple(float(x) for x in self.kappa)
        object.__setattr__(self, "kappa", k)
        if len(k) < 2:
            raise ArgumentError("kappa needs at least two coordinates")
        if any(k[i] > k[i + 1] for i in range(len(k) - 1)):
            raise ArgumentError(f"kappa must be sorted, got {k}")
        if 0.0 not in k:
            raise ArgumentError(f"kappa must contain a zero coordinate, got {k}")

    @property
    def span(self) -> float:
        return self.kappa[-1] - self.kappa[0]


@dataclass(frozen=True)
class OffspringCurve:
    """gamma_kappa(t) = sum_j gamma(t + kappa_j), evaluated through the parent."""

    parent: Curve
    spec: OffspringSpec
    domain: tuple = field(init=False)

    def __post_init__(self):
        c, k = self.parent, self.spec.kappa
        if len(k) != c.dim:
            raise ArgumentError(f"kappa has {len(k)} entries, curve dimension is {c.dim}")
        if self.spec.span > c.length:
            raise ArgumentError(f"kappa span {self.spec.span} exceeds interval length {c.length}")
        object.__setattr__(self, "domain", (c.interval[0] - k[0], c.interval[1] - k[-1]))

    @property
    def dim(self) -> int:
        return self.parent.dim

    def _shifts(self, t):
        t = check_domain(self.parent, t, self.domain)
        return [t + kj for kj in self.spec.kappa]

    def position(self, t):
        return sum(_eval(self.parent, s, 0) for s in self._shifts(t))

    def derivative(self, t, j: int):
        _check_order(self.parent, j)
        return sum(_eval(self.parent, s, j) for s in self._shifts(t))

    def derivative_matrix(self, t):
        return sum(_derivative_matrix(self.parent, s) for s in self._shifts(t))

    def torsion(self, t):
        out = det(self.derivative_matrix(t))
        return float(out) if np.ndim(out) == 0 else out

    def affine_weight(self, t):
        out = _weight_from_torsion(self.torsion(t), self.dim)
        return float(out) if np.ndim(out) == 0 else out

    def torsion_closed_form(self, t):
        """Closed form for simple-type and exponential parents.

        Simple type: d^(d-1) * sum_j phi^(d)(t + kappa_j).
        Exponential: V(b) exp(t sum b) prod_i E_ii(kappa), E_ii = sum_j e^(b_i kappa_j).
        """
        c, d = self.parent, self.dim
        t = check_domain(c, t, self.domain)
        shifts = [t + kj for kj in self.spec.kappa]
        if c.family == "simple_poly":
            out = d ** (d - 1) * sum(_poly_deriv(c.params, d, s) for s in shifts)
        elif c.family == "model":
            out = d**d * np.ones_like(shifts[0])
        elif c.family == "exponential":
            b = np.asarray(c.params)
            kap = np.asarray(self.spec.kappa)
            e_diag = np.exp(np.outer(b, kap)).sum(axis=1)
            out = vandermonde(b) * np.exp(t * b.sum()) * np.prod(e_diag)
        else:
            raise ArgumentError(f"no closed-form offspring torsion for family {c.family!r}")
        return float(out) if np.ndim(out) == 0 else out


def offspring_curve(c: Curve, k: OffspringSpec) -> OffspringCurve:
    return OffspringCurve(c, k)


def offspring_torsion_batch(c: Curve, t, kappa):
    """Offspring torsion for many (t, kappa) pairs at once.

    ``t`` has shape (n,), ``kappa`` shape (n, d). Returns (offspring torsion,
    parent torsion at every shifted point with shape (n, d)).
    """
    t = np.asarray(t, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    s = t[:, None] + kappa
    check_domain(c, s)
    mats = _derivative_matrix(c, s)  # (n, d, d, d): point j, then matrix
    return det(mats.sum(axis=1)), det(mats)
