"""Knapp parallelepipeds, the affine-measure saturation ratio and the extension operator.

Weights here are taken from the closed-form torsion of each family, so the
model curve has weight exactly 1 and its ratios are exactly 1.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .curves import Curve, _eval, check_domain, torsion_closed_form, torsion_detail, weight_exponent
from .errors import ArgumentError, ArlabError, DegenerateFrameError, ResolutionError
from .streams import map_ordered

VOLUME_RTOL = 1e-10
MEMBERSHIP_TOL = 1e-9
PANEL_PHASE = math.pi / 4
PANEL_NODES = 8


def volume_constant(d: int) -> Fraction:
    """C_3(d) = 2^d prod_{j<=d} 1/j!."""
    return Fraction(2**d, math.prod(math.factorial(j) for j in range(1, d + 1)))


def weight(c: Curve, t):
    """Affine weight |tau|^(2/(d^2+d)) from the closed-form torsion."""
    e = weight_exponent(c.dim)
    return np.abs(torsion_closed_form(c, t)) ** (e.numerator / e.denominator)


def displacement(c: Curve, t0: float, u):
    """gamma(t0 + u) - gamma(t0) without cancellation for small u."""
    u = np.asarray(u, dtype=float)
    if c.family in ("model", "simple_poly"):
        deg = c.dim if c.family == "model" else max(c.dim - 1, len(c.params) - 1)
        return sum(u[..., None] ** j / math.factorial(j) * _eval(c, t0, j) for j in range(1, deg + 1))
    if c.family == "monomial":
        a = np.asarray(c.params, dtype=float)
        return t0**a * np.expm1(a * np.log1p(u[..., None] / t0))
    b = np.asarray(c.params, dtype=float)
    return np.exp(b * t0) * np.expm1(b * u[..., None]) / b


@dataclass(frozen=True)
class Parallelepiped:
    base: np.ndarray
    frame: np.ndarray  # columns gamma^(j)(t), j = 1..d
    scale: np.ndarray  # edge j is scale[j] * frame[:, j]
    volume: float
    predicted_volume: float

    @property
    def edges(self) -> np.ndarray:
        return self.frame * self.scale

    @property
    def volume_rel_error(self) -> float:
        return abs(self.volume - self.predicted_volume) / self.predicted_volume

    def offset_coordinates(self, offsets) -> np.ndarray:
        """Edge coordinates b of base + offset, i.e. offset = edges @ b."""
        off = np.atleast_2d(np.asarray(offsets, dtype=float))
        return np.linalg.solve(self.frame, off.T).T / self.scale

    def coordinates(self, points) -> np.ndarray:
        return self.offset_coordinates(np.atleast_2d(np.asarray(points, dtype=float)) - self.base)

    def contains_offsets(self, offsets, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        b = self.offset_coordinates(offsets)
        return np.all((b >= -tol) & (b <= 1 + tol), axis=-1)

    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        b = self.coordinates(points)
        return np.all((b >= -tol) & (b <= 1 + tol), axis=-1)


def taylor_parallelepiped(c: Curve, t: float, h: float) -> Parallelepiped:
    """gamma(t) + {sum_j b_j gamma^(j)(t)/j! : 0 <= b_j <= 2 h^j}."""
    if not h > 0:
        raise ArgumentError("h must be positive")
    t = float(t)
    d = c.dim
    det = torsion_detail(c, t)
    if det.value == 0 or det.degenerate:
        raise DegenerateFrameError(
            f"torsion vanishes at t={t}; the Taylor frame is degenerate and the sublevel branch applies"
        )
    scale = np.array([2 * h**j / math.factorial(j) for j in range(1, d + 1)])
    frame = np.stack([_eval(c, t, j) for j in range(1, d + 1)], axis=-1)
    edges = frame * scale
    vol = abs(float(np.linalg.det(edges)))
    pred = float(volume_constant(d)) * h ** ((d * d + d) / 2) * abs(det.value)
    P = Parallelepiped(_eval(c, t, 0), frame, scale, vol, pred)
    if P.volume_rel_error > VOLUME_RTOL:
        raise ArlabError(f"edge determinant {vol} disagrees with C_3(d) h^((d^2+d)/2) |tau| = {pred}")
    return P


def _gauss(a: float, b: float, n: int):
    g, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * g + 0.5 * (a + b), 0.5 * (b - a) * w


def _composite(a: float, b: float, panels: int, nodes: int):
    edges = np.linspace(a, b, panels + 1)
    g, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    return (mid + half * g).ravel(), (half * w).ravel()


def curve_measure_in(c: Curve, P: Parallelepiped, t_center: float, h: float, quad_n: int = 200) -> float:
    """Affine measure of {u in [0, h]: gamma(t+u) in P}.

    ``P`` is taken to be based at gamma(t_center), so membership is tested
    on the cancellation-free displacement. Membership is sampled on a grid
    of ``quad_n`` cells, every change of membership is located by
    bisection, and the weight is integrated over the inside pieces with
    Gauss-Legendre.
    """
    if quad_n < 100:
        raise ArgumentError("quad_n must be >= 100")
    if not h > 0:
        raise ArgumentError("h must be positive")
    t0 = float(t_center)
    top = min(h, c.interval[1] - t0)
    check_domain(c, t0)
    if top <= 0:
        return 0.0

    def inside(u):
        return P.contains_offsets(displacement(c, t0, np.atleast_1d(u)))

    grid = np.linspace(0.0, top, quad_n + 1)
    flags = inside(grid)
    cuts = []
    for i in np.flatnonzero(flags[1:] != flags[:-1]):
        lo, hi, flo = grid[i], grid[i + 1], flags[i]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if inside(mid)[0] == flo:
                lo = mid
            else:
                hi = mid
        cuts.append(0.5 * (lo + hi))
    edges = [0.0] + cuts + [top]
    total = 0.0
    state = bool(flags[0])
    for a, b in zip(edges, edges[1:]):
        if state and b > a:
            x, w = _gauss(t0 + a, t0 + b, 20)
            total += float(np.dot(w, weight(c, x)))
        state = not state
    return total


@dataclass
class KnappReport:
    t: float
    h: float
    volume: float
    curve_measure: float
    e2_ratio: float  # curve_measure / volume^(2/(d^2+d))
    limit_ratio: float  # mean of w over [t, t+h] / w(t)

    def to_dict(self) -> dict:
        return asdict(self)


def mean_weight(c: Curve, t: float, h: float, quad_n: int = 64) -> float:
    """(1/h) int_0^h w(t+u) du, normalized by the quadrature weight sum."""
    x, w = _composite(t, t + h, max(1, quad_n // 16), 16)
    return float(np.sum(w * weight(c, x)) / np.sum(w))


def knapp_ratio_scan(c: Curve, t: float, h_ladder, quad_n: int = 200) -> list:
    """Knapp reports along a decreasing h ladder; the limit ratio tends to 1."""
    h_ladder = [float(h) for h in h_ladder]
    if any(not h > 0 for h in h_ladder):
        raise ArgumentError("ladder values must be positive")
    if any(b >= a for a, b in zip(h_ladder, h_ladder[1:])):
        raise ArgumentError("h ladder must be strictly decreasing")
    t = float(t)
    tau = float(torsion_closed_form(c, t))
    if tau == 0:
        raise DegenerateFrameError(f"torsion vanishes at t={t}")
    w_t = float(weight(c, t))
    d = c.dim
    out = []
    for h in h_ladder:
        if t + h > c.interval[1]:
            raise ArgumentError(f"t + h = {t + h} leaves the curve interval")
        P = taylor_parallelepiped(c, t, h)
        meas = curve_measure_in(c, P, t, h, quad_n)
        out.append(KnappReport(
            t, h, P.volume, meas, meas / P.volume ** (2 / (d * d + d)), mean_weight(c, t, h) / w_t
        ))
    return out


def reports_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True)


# --------------------------------------------------------------------------
# the extension operator


@dataclass(frozen=True)
class ExtensionValue:
    value: complex
    error: float
    quad_n: int
    panels: int


def _as_callable(f):
    if callable(f):
        return f
    grid, vals = f
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(vals)
    if np.iscomplexobj(vals):
        return lambda t: np.interp(t, grid, vals.real) + 1j * np.interp(t, grid, vals.imag)
    return lambda t: np.interp(t, grid, vals)


def required_panels(c: Curve, x) -> int:
    """Fewest equal panels keeping the phase change per panel below pi/4."""
    x = np.asarray(x, dtype=float)
    lo, hi = c.interval
    probe = np.linspace(lo, hi, 2049)
    speed = float(np.max(np.abs(_eval(c, probe, 1) @ x)))
    # sampled maximum plus a margin for what falls between probes
    speed *= 1.05
    return max(1, math.ceil(speed * (hi - lo) / PANEL_PHASE))


def _ext_sum(c: Curve, fc, x, panels: int) -> complex:
    lo, hi = c.interval
    t, w = _composite(lo, hi, panels, PANEL_NODES)
    phase = _eval(c, t, 0) @ x
    return complex(np.sum(w * np.exp(-1j * phase) * fc(t) * weight(c, t)))


def extension_eval(c: Curve, f, x, quad_n: int | None = None) -> ExtensionValue:
    """E_w f(x) = int_I e^(-i <x, gamma(t)>) f(t) w(t) dt by composite Gauss-Legendre.

    ``quad_n`` is the total node count (``PANEL_NODES`` per panel). When the
    phase would turn by more than pi/4 on some panel the call is refused with
    the required node count. The error estimate is the change when every
    panel is halved.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (c.dim,):
        raise ArgumentError(f"x must have {c.dim} coordinates")
    need = required_panels(c, x)
    if quad_n is None:
        panels = need
    else:
        panels = int(quad_n) // PANEL_NODES
        if panels < need:
            raise ResolutionError(
                f"quad_n={quad_n} leaves phase steps above pi/4 at |x|={np.linalg.norm(x):.6g}",
                need * PANEL_NODES,
            )
    fc = _as_callable(f)
    coarse = _ext_sum(c, fc, x, panels)
    fine = _ext_sum(c, fc, x, 2 * panels)
    return ExtensionValue(fine, abs(fine - coarse), panels * PANEL_NODES, panels)


def extension_field(c: Curve, f, xs, quad_n: int | None = None) -> list:
    """extension_eval over the rows of ``xs``; order independent, fanned out over workers."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    return map_ordered(lambda x: extension_eval(c, f, x, quad_n), list(xs))


def field_csv(xs, values) -> str:
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(xs.shape[1])] + ["re", "im", "abs"])
    for x, v in zip(xs, values):
        z = v.value if isinstance(v, ExtensionValue) else complex(v)
        w.writerow([f"{xi:.15g}" for xi in x] + [f"{z.real:.15g}", f"{z.imag:.15g}", f"{abs(z):.15g}"])
    return buf.getvalue()


def weak_norm_estimate(values, volumes, Q: float, alphas=None) -> float:
    """Lower estimate of sup_alpha alpha * meas{|h| > alpha}^(1/Q) from samples.

    Without an explicit ladder the supremum is taken in the limit alpha -> v
    from below at every sampled level v, i.e. max_v v * meas{|h| >= v}^(1/Q).
    """
    v = np.abs(np.asarray(values, dtype=complex if np.iscomplexobj(values) else float)).ravel()
    vol = np.broadcast_to(np.asarray(volumes, dtype=float), v.shape).ravel()
    if not Q > 0:
        raise ArgumentError("Q must be positive")
    if v.size == 0:
        return 0.0
    order = np.argsort(-v, kind="stable")
    vs, cum = v[order], np.cumsum(vol[order])
    if alphas is None:
        # for tied values the measure must include every tied cell
        last = np.r_[vs[1:] != vs[:-1], True]
        return float(np.max(vs[last] * cum[last] ** (1 / Q)))
    a = np.asarray(alphas, dtype=float)
    # number of samples with |h| > alpha among values sorted descending
    k = np.searchsorted(-vs, -a, side="left")
    meas = np.where(k > 0, cum[np.maximum(k - 1, 0)], 0.0)
    return float(np.max(a * meas ** (1 / Q)))
