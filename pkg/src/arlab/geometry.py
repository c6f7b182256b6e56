"""Numerical probes of the geometric hypotheses behind the restriction estimates.

Everything here is empirical: minima over samples are reported as observed
constants, collision searches are falsifiers, and Monte Carlo results come
with standard errors. All random draws go through :mod:`arlab.streams`, so a
result depends only on ``(seed, n)``.
"""

from __future__ import annotations

import io
import csv
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import poly
from .curves import Curve, OffspringSpec, _derivative_matrix, _eval, check_domain, offspring_torsion_batch
from .errors import ArgumentError, PreconditionError
from .linalg import det, vandermonde
from .streams import map_chunks

NO_COLLISION = "no collision found"
COLLISION = "collision found"


@dataclass(frozen=True)
class SimplexSample:
    """A point of the ordered region t_1 < ... < t_d."""

    t: tuple

    def __post_init__(self):
        t = tuple(float(x) for x in self.t)
        object.__setattr__(self, "t", t)
        if len(t) < 2:
            raise ArgumentError("a simplex sample needs at least two coordinates")
        if any(not (a < b) for a, b in zip(t, t[1:])):
            raise ArgumentError(f"coordinates must be strictly increasing, got {t}")

    def check(self, c: Curve) -> "SimplexSample":
        if len(self.t) != c.dim:
            raise ArgumentError(f"sample has {len(self.t)} coordinates, curve dimension is {c.dim}")
        check_domain(c, self.t)
        return self

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.t, dtype=dtype)


def _as_points(c: Curve, s) -> np.ndarray:
    t = np.asarray(s.t if isinstance(s, SimplexSample) else s, dtype=float)
    if t.shape[-1] != c.dim:
        raise ArgumentError(f"expected {c.dim} coordinates, got {t.shape[-1]}")
    check_domain(c, t)
    srt = np.sort(t, axis=-1)
    if np.any(np.diff(srt, axis=-1) == 0):
        raise ArgumentError("repeated coordinates: the ordered region is empty there")
    return t


def sum_map(c: Curve, s):
    """Phi(t_1, ..., t_d) = sum_j gamma(t_j)."""
    t = np.asarray(s.t if isinstance(s, SimplexSample) else s, dtype=float)
    check_domain(c, t)
    return _eval(c, t, 0).sum(axis=-2)


def _jacobian_raw(c: Curve, t):
    # columns gamma'(t_i)
    return det(np.swapaxes(_eval(c, t, 1), -1, -2))


def jacobian(c: Curve, s):
    """det(gamma'(t_1), ..., gamma'(t_d)).

    Accepts a :class:`SimplexSample` or any array of distinct coordinates
    (unsorted input is evaluated as given, so the sign follows the order).
    """
    t = _as_points(c, s)
    out = _jacobian_raw(c, t)
    return float(out) if np.ndim(out) == 0 else out


def sample_simplex(c: Curve, n: int, seed: int) -> np.ndarray:
    """``n`` sorted uniform d-tuples from the parameter interval, shape (n, d)."""
    lo, hi = c.interval
    d = c.dim

    def draw(rng, size):
        return np.sort(rng.uniform(lo, hi, size=(size, d)), axis=1)

    return np.concatenate(map_chunks(draw, n, seed), axis=0)


# --------------------------------------------------------------------------
# Jacobian lower bound


@dataclass
class JacobianReport:
    samples: int
    seed: int
    degenerate: bool
    used: int = 0
    minimum: float = math.nan
    maximum: float = math.nan
    variance: float = math.nan
    bin_edges: list = field(default_factory=list)
    counts: list = field(default_factory=list)

    @property
    def status(self) -> str:
        return "degenerate family" if self.degenerate else "ok"

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, n in zip(self.bin_edges, self.bin_edges[1:], self.counts):
            w.writerow([repr(lo), repr(hi), n])
        return buf.getvalue()

    def to_dict(self) -> dict:
        out = asdict(self)
        out["status"] = self.status
        return out


def jacobian_ratios(c: Curve, t):
    """|J| / ((prod |tau(t_i)|)^(1/d) V(t)) for rows of ``t``; nan where tau vanishes."""
    t = np.asarray(t, dtype=float)
    d = c.dim
    tau = np.abs(det(_derivative_matrix(c, t)))
    denom = np.prod(tau, axis=-1) ** (1.0 / d) * np.abs(vandermonde(t))
    jac = np.abs(_jacobian_raw(c, t))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denom > 0, jac / denom, np.nan)


def check_jacobian_bound(c: Curve, n_samples: int, seed: int, bins: int = 20) -> JacobianReport:
    """Empirical lower constant in |J| >= c1 (prod tau)^(1/d) V over random ordered tuples."""
    if n_samples < 1:
        raise ArgumentError("n_samples must be >= 1")
    t = sample_simplex(c, n_samples, seed)
    r = jacobian_ratios(c, t)
    ok = np.isfinite(r)
    rep = JacobianReport(samples=int(n_samples), seed=int(seed), degenerate=not ok.any())
    if rep.degenerate:
        return rep
    r = r[ok]
    counts, edges = np.histogram(r, bins=bins)
    rep.used = int(r.size)
    rep.minimum = float(r.min())
    rep.maximum = float(r.max())
    rep.variance = float(r.var())
    rep.bin_edges = [float(x) for x in edges]
    rep.counts = [int(x) for x in counts]
    return rep


# --------------------------------------------------------------------------
# offspring torsion


def offspring_ratio_batch(c: Curve, t, kappa):
    """|tau_kappa(t)| / max_j |tau(t + kappa_j)| for many pairs; nan where the parent vanishes."""
    off, parent = offspring_torsion_batch(c, t, kappa)
    m = np.abs(parent).max(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(m > 0, np.abs(off) / m, np.nan)


@dataclass(frozen=True)
class OffspringResult:
    min_ratio: float
    evaluated: int
    skipped: int


def check_offspring_torsion(c: Curve, k: OffspringSpec, grid) -> OffspringResult:
    """Minimum over ``grid`` of the offspring-to-parent torsion ratio.

    Grid points where every parent torsion vanishes are skipped and counted.
    """
    if not isinstance(k, OffspringSpec):
        k = OffspringSpec(k)
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ArgumentError("empty grid")
    if len(k.kappa) != c.dim:
        raise ArgumentError(f"kappa has {len(k.kappa)} entries, curve dimension is {c.dim}")
    lo, hi = c.interval
    check_domain(c, grid, (lo - k.kappa[0], hi - k.kappa[-1]))
    kap = np.broadcast_to(np.asarray(k.kappa), (grid.size, c.dim))
    r = offspring_ratio_batch(c, grid, kap)
    ok = np.isfinite(r)
    return OffspringResult(
        float(r[ok].min()) if ok.any() else math.nan, int(ok.sum()), int((~ok).sum())
    )


# --------------------------------------------------------------------------
# multiplicity falsifier


@dataclass
class MultiplicityReport:
    flag: str
    pairs: int
    seed: int
    tol: float
    witness: tuple | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.witness is not None:
            out["witness"] = [list(map(float, w)) for w in self.witness]
        return out


def multiplicity_probe(c: Curve, n_pairs: int, seed: int, tol: float, iters: int = 60) -> MultiplicityReport:
    """Search for s != s' in the ordered region with Phi(s) = Phi(s').

    For every random ``s`` a second tuple is started nearby and pushed onto
    the fibre of Phi through ``s`` by projected Gauss-Newton (pseudo-inverse
    steps, clipped to the interval, re-sorted). A pair counts as a collision
    when the residual is below ``tol`` while the tuples differ by more than
    ``10 tol``. Finding nothing proves nothing: this is a falsifier only.
    """
    if n_pairs < 1:
        raise ArgumentError("n_pairs must be >= 1")
    if not tol > 0:
        raise ArgumentError("tol must be > 0")
    lo, hi = c.interval
    d = c.dim
    spread = 0.1 * (hi - lo)

    def probe(rng, size):
        s = np.sort(rng.uniform(lo, hi, size=(size, d)), axis=1)
        s2 = np.sort(np.clip(s + rng.uniform(-spread, spread, size=(size, d)), lo, hi), axis=1)
        target = _eval(c, s, 0).sum(axis=-2)
        for _ in range(iters):
            res = _eval(c, s2, 0).sum(axis=-2) - target
            jac = np.swapaxes(_eval(c, s2, 1), -1, -2)
            step = np.einsum("nij,nj->ni", np.linalg.pinv(jac, rcond=1e-10), res)
            s2 = np.sort(np.clip(s2 - step, lo, hi), axis=1)
        res = np.linalg.norm(_eval(c, s2, 0).sum(axis=-2) - target, axis=-1)
        gap = np.abs(s2 - s).max(axis=-1)
        ordered = np.all(np.diff(s2, axis=1) > tol, axis=1)
        hit = (res < tol) & (gap > 10 * tol) & ordered
        idx = np.flatnonzero(hit)
        return (s[idx[0]], s2[idx[0]]) if idx.size else None

    for found in map_chunks(probe, n_pairs, seed, chunk=4096):
        if found is not None:
            return MultiplicityReport(COLLISION, int(n_pairs), int(seed), float(tol), found)
    return MultiplicityReport(NO_COLLISION, int(n_pairs), int(seed), float(tol))


# --------------------------------------------------------------------------
# Vandermonde sublevel sets


def _sublevel_counts(d: int, alphas: np.ndarray, R: float, n: int, seed: int) -> np.ndarray:
    def count(rng, size):
        h = rng.uniform(-R, R, size=(size, d - 1))
        vals = np.sort(np.abs(np.prod(h, axis=1) * vandermonde(h)))
        return np.searchsorted(vals, alphas, side="right")

    return np.sum(map_chunks(count, n, seed), axis=0)


def vandermonde_sublevel_measure(d: int, alpha: float, box_halfwidth: float, n_mc: int, seed: int):
    """MC estimate of meas{h in [-R,R]^(d-1): |h_1...h_(d-1)| prod|h_j - h_i| <= alpha}.

    Returns ``(estimate, std_error)`` with the binomial standard error.
    """
    est, se = vandermonde_sublevel_ladder(d, [alpha], box_halfwidth, n_mc, seed)
    return float(est[0]), float(se[0])


def vandermonde_sublevel_ladder(d: int, alphas, box_halfwidth: float, n_mc: int, seed: int):
    """Estimates for a whole alpha ladder from one shared point cloud (exactly monotone)."""
    if d < 2:
        raise ArgumentError("d must be >= 2")
    if n_mc < 1000:
        raise ArgumentError("n_mc must be >= 1000")
    alphas = np.asarray(alphas, dtype=float)
    if np.any(alphas < 0) or not np.all(np.isfinite(alphas)):
        raise ArgumentError("alpha must be finite and >= 0")
    if not box_halfwidth > 0:
        raise ArgumentError("box half-width must be > 0")
    vol = (2.0 * box_halfwidth) ** (d - 1)
    hits = _sublevel_counts(d, alphas, float(box_halfwidth), int(n_mc), seed)
    p = hits / n_mc
    # product vanishes only on a null set
    p = np.where(alphas == 0, 0.0, p)
    return vol * p, vol * np.sqrt(p * (1 - p) / n_mc)


@dataclass
class SublevelFit:
    d: int
    alphas: list
    estimates: list
    std_errors: list
    slope: float
    constant: float  # smallest C with estimate <= C alpha^(2/d) on the ladder
    n_mc: int
    seed: int
    box_halfwidth: float

    @property
    def target_slope(self) -> float:
        return 2.0 / self.d

    @property
    def monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.estimates, self.estimates[1:]))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["target_slope"] = self.target_slope
        out["monotone"] = self.monotone
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "estimate", "std_error"])
        for row in zip(self.alphas, self.estimates, self.std_errors):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def sublevel_slope_fit(d: int, alphas=None, box_halfwidth: float = 1.0, n_mc: int = 10**6, seed: int = 0) -> SublevelFit:
    """Least-squares slope of log(measure) against log(alpha) over a shared ladder."""
    alphas = np.logspace(-6, -2, 6) if alphas is None else np.asarray(alphas, dtype=float)
    est, se = vandermonde_sublevel_ladder(d, alphas, box_halfwidth, n_mc, seed)
    if np.any(est <= 0):
        raise ArgumentError("some alpha in the ladder captured no samples; raise n_mc or alpha")
    slope = float(np.polyfit(np.log(alphas), np.log(est), 1)[0])
    const = float(np.max(est / alphas ** (2.0 / d)))
    return SublevelFit(
        d, [float(a) for a in alphas], [float(x) for x in est], [float(x) for x in se],
        slope, const, int(n_mc), int(seed), float(box_halfwidth),
    )


# --------------------------------------------------------------------------
# polynomial sublevel lemma


@dataclass(frozen=True)
class PolySublevel:
    measured: float
    bound: float
    degree: int

    @property
    def holds(self) -> bool:
        return self.measured <= self.bound


def polynomial_sublevel_check(p, a, b, eps) -> PolySublevel:
    """|{t in (a,b): |p(t)| < eps |p(b)|}| against 2N eps^(1/(2N)) (b - a).

    ``p`` holds coefficients lowest degree first. Since p has constant sign
    sigma on (a, b), the set is {sigma p < eps |p(b)|}; it is found exactly by
    isolating the roots of sigma p - eps |p(b)| in (a, b) and testing its sign
    at a rational point of every gap.
    """
    P = poly.make(p)
    if not P:
        raise PreconditionError("p must not vanish on (a, b)")
    a, b, e = poly.rational(a), poly.rational(b), poly.rational(eps)
    if not a < b:
        raise ArgumentError("need a < b")
    N = poly.degree(P)
    if not (0 < e < Fraction(1, 2**N)):
        raise ArgumentError(f"eps must lie in (0, 2^-{N})")
    if poly.has_root_in_open(P, a, b):
        raise PreconditionError("p has a root in (a, b)")
    sigma = 1 if poly.evaluate(P, (a + b) / 2) > 0 else -1
    q = poly.sub(poly.scale(P, sigma), [e * abs(poly.evaluate(P, b))])
    cuts = [a]
    if poly.degree(q) >= 1:
        cuts += [x for x in poly.real_roots_in(q, a, b) if a < x < b]
    cuts.append(b)
    measured = Fraction(0)
    for lo, hi in zip(cuts, cuts[1:]):
        if hi > lo and poly.evaluate(q, (lo + hi) / 2) < 0:
            measured += hi - lo
    bound = 2 * N * float(e) ** (1.0 / (2 * N)) * float(b - a) if N else 0.0
    return PolySublevel(float(measured), bound, N)


# --------------------------------------------------------------------------
# the Psi kernel


def _det_columns(s, phi_prime):
    d = len(s)
    rows = [[sj**k / math.factorial(k) for sj in s] for k in range(d - 1)]
    rows.append([phi_prime(sj) for sj in s])
    return float(det(np.array(rows)))


def direct_jd(phi, s) -> float:
    """det of the matrix with columns (1, s_j, ..., s_j^(d-2)/(d-2)!, phi'(s_j))."""
    dphi = np.polynomial.Polynomial(np.asarray(phi, dtype=float)).deriv()
    return _det_columns(np.asarray(s, dtype=float), dphi)


def psi_exact_d3(u, s):
    """Closed form of the kernel for d = 3: (min(u,s2) - s1)(s3 - max(u,s2)) on [s1, s3]."""
    s1, s2, s3 = s
    u = np.asarray(u, dtype=float)
    inside = (u >= s1) & (u <= s3)
    return np.where(inside, (np.minimum(u, s2) - s1) * (s3 - np.maximum(u, s2)), 0.0)


def _psi_box(s):
    """Bounds of the box B_2 x ... x B_(d-1) as (lo, hi) arrays, levels from d-1 down to 2."""
    d = len(s)
    lo, hi, levels = [], [], []
    for m in range(d - 1, 1, -1):
        k = d - m
        for j in range(m):
            lo.append(s[j])
            hi.append(s[j + k])
        levels.append(m)
    return np.array(lo), np.array(hi), levels


def _chain_ok(x, s, levels):
    """Membership in the chained region; x packs levels d-1, ..., 2 along axis 1."""
    ok = np.ones(x.shape[0], dtype=bool)
    upper = np.broadcast_to(np.asarray(s), (x.shape[0], len(s)))
    pos = 0
    for m in levels:
        cur = x[:, pos:pos + m]
        ok &= np.all(cur >= upper[:, :-1], axis=1) & np.all(cur <= upper[:, 1:], axis=1)
        upper = cur
        pos += m
    return ok, upper  # upper is now x^2


def _gl_nodes(s, m):
    g, w = np.polynomial.legendre.leggauss(m)
    nodes, weights = [], []
    for a, b in zip(s, s[1:]):
        nodes.append(0.5 * (b - a) * g + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass
class PsiReport:
    s: list
    d: int
    n_mc: int
    seed: int
    direct: float
    integral: float  # estimate of int phi^(d) Psi
    integral_se: float
    quad_error: float
    psi_mass: float  # estimate of int Psi
    psi_mass_se: float
    psi_mass_target: float  # c_d V(s)
    nodes: list
    psi: list
    psi_se: list
    psi_bound: float
    status: str = "ok"

    @property
    def combined_error(self) -> float:
        return math.hypot(self.integral_se, self.quad_error)

    @property
    def identity_discrepancy(self) -> float:
        return abs(self.direct - self.integral)

    @property
    def mass_discrepancy(self) -> float:
        return abs(self.psi_mass - self.psi_mass_target)

    @property
    def bound_violations(self) -> int:
        p = np.asarray(self.psi)
        return int(np.sum((p < 0) | (p > self.psi_bound)))

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("combined_error", "identity_discrepancy", "mass_discrepancy", "bound_violations"):
            out[k] = getattr(self, k)
        return out


def _mc_psi(s, fvals_fine, wf, nodes_fine, fvals_coarse, wc, nodes_coarse, n, seed):
    lo, hi, levels = _psi_box(s)
    vol = float(np.prod(hi - lo))

    def run(rng, size):
        x = lo + (hi - lo) * rng.uniform(size=(size, lo.size))
        ok, x2 = _chain_ok(x, s, levels)
        a, b = x2[:, :1], x2[:, 1:2]

        def ind(nodes):
            return ok[:, None] & (a <= nodes) & (nodes <= b)

        i_f = ind(nodes_fine)
        g = i_f @ (wf * fvals_fine)
        mass = i_f @ wf
        gc = ind(nodes_coarse) @ (wc * fvals_coarse)
        return (
            i_f.sum(axis=0),
            np.array([g.sum(), (g * g).sum(), mass.sum(), (mass * mass).sum(), gc.sum()]),
        )

    parts = map_chunks(run, n, seed)
    hits = sum(p[0] for p in parts)
    acc = sum(p[1] for p in parts)
    return vol, hits, acc


def psi_kernel_checks(phi, s, n_mc: int = 10**5, seed: int = 0, nodes_per_piece: int | None = None,
                      inconclusive_rtol: float = 0.05) -> PsiReport:
    """Compare det J_d(s; phi) with int phi^(d)(u) Psi(u; s) du.

    Psi(u) is the volume of the chained region at level u, estimated by
    rejection sampling in the box B_2 x ... x B_(d-1) with one shared cloud of
    ``n_mc`` points for every quadrature node. Integrals over [s_1, s_d] use
    Gauss-Legendre on each [s_j, s_(j+1)], where Psi is polynomial; the
    quadrature error is the change against a rule with one node fewer.
    """
    s = SimplexSample(s).t
    d = len(s)
    if d < 3:
        raise ArgumentError("the kernel identity needs d >= 3")
    P = np.polynomial.Polynomial(np.asarray(phi, dtype=float))
    N = max(P.degree(), d)
    m = nodes_per_piece or max(4, (N + 1) // 2 + 1)
    fd = P.deriv(d)
    nf, wf = _gl_nodes(s, m)
    nc, wc = _gl_nodes(s, m - 1)
    vol, hits, acc = _mc_psi(s, fd(nf), wf, nf, fd(nc), wc, nc, int(n_mc), seed)
    n = float(n_mc)
    g_mean, g2_mean, m_mean, m2_mean, gc_mean = acc / n

    def se(mean, mean2):
        return vol * math.sqrt(max(mean2 - mean * mean, 0.0) / (n - 1))

    p = hits / n
    psi = vol * p
    psi_se = vol * np.sqrt(p * (1 - p) / n)
    integral = vol * g_mean
    v = float(vandermonde(np.asarray(s)))
    c_d = 1.0 / math.prod(math.factorial(k) for k in range(2, d))
    rep = PsiReport(
        s=list(s), d=d, n_mc=int(n_mc), seed=int(seed),
        direct=direct_jd(P.coef, s),
        integral=float(integral), integral_se=se(g_mean, g2_mean),
        quad_error=float(abs(integral - vol * gc_mean)),
        psi_mass=float(vol * m_mean), psi_mass_se=se(m_mean, m2_mean), psi_mass_target=c_d * v,
        nodes=[float(x) for x in nf], psi=[float(x) for x in psi], psi_se=[float(x) for x in psi_se],
        psi_bound=v / (s[-1] - s[0]),
    )
    scale = max(abs(rep.direct), abs(rep.integral), 1e-300)
    if rep.combined_error > inconclusive_rtol * scale and rep.direct != 0:
        rep.status = "inconclusive"
    return rep


# --------------------------------------------------------------------------
# sign intervals and dyadic cells


@dataclass(frozen=True)
class SignIntervals:
    intervals: list  # (lo, hi) with -inf / inf at the ends
    degenerate: bool  # tau identically zero


def sign_interval_decomposition(phi, d: int) -> SignIntervals:
    """Partition of the line by the real roots of phi^(d) phi^(d+1)."""
    P = poly.make(phi)
    fd = poly.derivative(P, d)
    if not fd:
        return SignIntervals([(-math.inf, math.inf)], True)
    prod = poly.mul(fd, poly.derivative(P, d + 1)) or fd
    roots = [float(r) for r in poly.real_roots(prod, tol=Fraction(1, 10**12))]
    edges = [-math.inf] + roots + [math.inf]
    return SignIntervals(list(zip(edges, edges[1:])), False)


def dyadic_cell_index(s) -> int:
    """The integer l with 2^(-l-1) < |V(t)| <= 2^(-l)."""
    t = np.asarray(s.t if isinstance(s, SimplexSample) else s, dtype=float)
    v = abs(float(vandermonde(t)))
    if v == 0:
        raise ArgumentError("repeated coordinates give V = 0")
    mant, e = math.frexp(v)
    return 1 - e if mant == 0.5 else -e


# --------------------------------------------------------------------------
# combined report


@dataclass
class HypothesisReport:
    c1_estimate: float
    c2_estimate: float
    multiplicity_flag: str
    samples: int
    rng_seed: int
    witness: list | None = None
    notes: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def hypothesis_report(c: Curve, kappa, n: int, seed: int, tol: float = 1e-9, grid_points: int = 100) -> HypothesisReport:
    jac = check_jacobian_bound(c, n, seed)
    k = kappa if isinstance(kappa, OffspringSpec) else OffspringSpec(kappa)
    lo, hi = c.interval
    grid = np.linspace(lo - k.kappa[0], hi - k.kappa[-1], grid_points)
    off = check_offspring_torsion(c, k, grid)
    mult = multiplicity_probe(c, n, seed, tol)
    notes = {"jacobian_status": jac.status, "offspring_skipped": off.skipped}
    return HypothesisReport(
        c1_estimate=0.0 if jac.degenerate else jac.minimum,
        c2_estimate=off.min_ratio,
        multiplicity_flag=mult.flag,
        samples=int(n),
        rng_seed=int(seed),
        witness=None if mult.witness is None else [list(map(float, w)) for w in mult.witness],
        notes=notes,
    )
