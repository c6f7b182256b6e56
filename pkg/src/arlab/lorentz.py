"""Lorentz quasinorms and real interpolation on finitely supported data.

Step functions are lists of ``(value, mass)`` pairs on an abstract measure
space; weighted sequences are finitely supported maps ``k -> f_k`` measured
in ``l^p_s`` with weight ``2^(k s)``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .streams import stream

TAIL_RTOL = 1e-10


def _positive(name, x, allow_inf=False):
    x = float(x)
    if not (x > 0) or (math.isinf(x) and not allow_inf) or math.isnan(x):
        raise ArgumentError(f"{name} must be positive{' (inf allowed)' if allow_inf else ''}, got {x}")
    return x


# --------------------------------------------------------------------------
# step functions and Lorentz quasinorms


@dataclass(frozen=True)
class StepFunction:
    """A simple function given by (value, mass) pairs."""

    pieces: tuple

    def __post_init__(self):
        pcs = []
        for v, m in self.pieces:
            v, m = float(v), float(m)
            if not (m > 0 and math.isfinite(m)):
                raise ArgumentError(f"masses must be positive and finite, got {m}")
            if not (v >= 0 and math.isfinite(v)):
                raise ArgumentError(f"values must be nonnegative and finite, got {v}")
            pcs.append((v, m))
        object.__setattr__(self, "pieces", tuple(pcs))

    @property
    def total_mass(self) -> float:
        return math.fsum(m for _, m in self.pieces)

    def scaled(self, c: float) -> "StepFunction":
        return StepFunction(tuple((abs(c) * v, m) for v, m in self.pieces))

    def to_json(self) -> str:
        return json.dumps([[v, m] for v, m in self.pieces])

    @classmethod
    def from_json(cls, text: str) -> "StepFunction":
        return cls(tuple(tuple(p) for p in json.loads(text)))


def decreasing_rearrangement(f: StepFunction) -> StepFunction:
    """Canonical form: values strictly decreasing, equal values merged."""
    merged: dict[float, list] = {}
    for v, m in f.pieces:
        merged.setdefault(v, []).append(m)
    return StepFunction(tuple((v, math.fsum(merged[v])) for v in sorted(merged, reverse=True)))


def _levels(f: StepFunction):
    g = decreasing_rearrangement(f)
    v = np.array([p[0] for p in g.pieces])
    m = np.array([p[1] for p in g.pieces])
    return v, m, np.cumsum(m)


def _power_increments(mass, cum, a):
    """cum_k^a - cum_(k-1)^a without cancellation."""
    prev = cum - mass
    out = np.empty_like(cum)
    first = prev <= 0
    out[first] = cum[first] ** a
    pk = prev[~first]
    out[~first] = pk**a * np.expm1(a * np.log1p(mass[~first] / pk))
    return out


def lorentz_quasinorm(f: StepFunction, p: float, q: float) -> float:
    """||f||_{L^{p,q}} = (q/p int t^{q/p} f*(t)^q dt/t)^{1/q}, exact on step data.

    On a step rearrangement the integral is sum_k v_k^q (m_k^{q/p} - m_(k-1)^{q/p})
    with m_k the cumulative masses; q = inf gives max_k v_k m_k^{1/p}.
    """
    p = _positive("p", p)
    q = _positive("q", q, allow_inf=True)
    v, m, cum = _levels(f)
    if v.size == 0:
        return 0.0
    if math.isinf(q):
        return float(np.max(v * cum ** (1 / p)))
    inc = m if q == p else _power_increments(m, cum, q / p)
    return float(math.fsum(v**q * inc) ** (1 / q))


def lp_norm(f: StepFunction, p: float) -> float:
    return math.fsum(v**p * m for v, m in f.pieces) ** (1 / p)


def maximal_starstar(f: StepFunction, rho: float, t: float) -> float:
    """h**_rho(t) = ((1/t) int_0^t (f*)^rho)^(1/rho).

    Below the total mass this is the supremum of rho-means over sets of mass
    at least t, attained by the top part of the rearrangement; from the total
    mass on f* vanishes and the same formula is the tail branch.
    """
    rho = float(rho)
    if not (0 < rho <= 1):
        raise ArgumentError(f"rho must lie in (0, 1], got {rho}")
    t = _positive("t", t)
    v, m, cum = _levels(f)
    take = np.clip(t - (cum - m), 0.0, m)
    return float((math.fsum(v**rho * take) / t) ** (1 / rho))


# --------------------------------------------------------------------------
# block Lorentz spaces


def dyadic_level(w) -> np.ndarray:
    """k with 2^k <= w < 2^(k+1), exact via frexp."""
    _, e = np.frexp(np.asarray(w, dtype=float))
    return e - 1


def _block_levels(f, w):
    f = np.asarray(f, dtype=float)
    w = np.broadcast_to(np.asarray(w, dtype=float), f.shape)
    if np.any((w <= 0) & (f != 0)):
        raise ArgumentError("weight must be positive on the support of f")
    k = np.where(w > 0, dyadic_level(np.where(w > 0, w, 1.0)), np.iinfo(np.int64).min)
    return f, w, k


def embed_blocks(f, w) -> dict:
    """The retract embedding: k -> chi_{Omega[w,k]} f, for every occupied level."""
    f, w, k = _block_levels(f, w)
    levels = np.unique(k[(w > 0)])
    return {int(lv): np.where(k == lv, f, 0.0) for lv in levels}


def section(blocks: dict, w) -> np.ndarray:
    """The retract projection: sum_k chi_{Omega[w,k]} F_k."""
    w = np.asarray(w, dtype=float)
    k = np.where(w > 0, dyadic_level(np.where(w > 0, w, 1.0)), np.iinfo(np.int64).min)
    out = np.zeros(w.shape)
    for lv, F in blocks.items():
        out = out + np.where(k == lv, np.asarray(F, dtype=float), 0.0)
    return out


def _sampled_step(f, mass) -> StepFunction:
    f = np.abs(np.asarray(f, dtype=float))
    mass = np.broadcast_to(np.asarray(mass, dtype=float), f.shape)
    keep = f != 0
    return StepFunction(tuple(zip(f[keep].tolist(), mass[keep].tolist())))


def block_lorentz_norm(f, w, mass, q: float, s: float, inner=(2.0, 2.0)) -> float:
    """(sum_k [2^(ks) ||chi_{Omega[w,k]} f||_X]^q)^(1/q) with X = L^{p,r}, inner = (p, r).

    ``f`` and ``w`` are samples on a common grid and ``mass`` the grid-cell
    measures (scalar or per point).
    """
    q = _positive("q", q, allow_inf=True)
    blocks = embed_blocks(f, w)
    terms = []
    for lv, F in blocks.items():
        nrm = lorentz_quasinorm(_sampled_step(F, mass), *inner)
        if nrm:
            terms.append(2.0 ** (lv * s) * nrm)
    if not terms:
        return 0.0
    terms = np.array(terms)
    return float(terms.max()) if math.isinf(q) else float(math.fsum(terms**q) ** (1 / q))


def weighted_lp_norm(f, w, mass, p: float) -> float:
    f = np.abs(np.asarray(f, dtype=float))
    mass = np.broadcast_to(np.asarray(mass, dtype=float), f.shape)
    return float(math.fsum((f**p * np.asarray(w) * mass).ravel()) ** (1 / p))


# --------------------------------------------------------------------------
# weighted sequences and couples


@dataclass(frozen=True)
class WeightedSequence:
    entries: tuple  # sorted (k, f_k) pairs, f_k != 0

    def __post_init__(self):
        items = self.entries.items() if isinstance(self.entries, dict) else self.entries
        e = {}
        for k, v in items:
            if int(k) != k:
                raise ArgumentError(f"indices must be integers, got {k}")
            v = float(v)
            if not math.isfinite(v):
                raise ArgumentError("entries must be finite")
            if v != 0:
                e[int(k)] = e.get(int(k), 0.0) + v
        object.__setattr__(self, "entries", tuple(sorted((k, v) for k, v in e.items() if v != 0)))

    @classmethod
    def from_arrays(cls, ks, vals) -> "WeightedSequence":
        return cls(tuple(zip(ks, vals)))

    @property
    def indices(self) -> np.ndarray:
        return np.array([k for k, _ in self.entries], dtype=np.int64)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.entries], dtype=float)

    def scaled(self, c: float) -> "WeightedSequence":
        return WeightedSequence(tuple((k, c * v) for k, v in self.entries))

    def to_json(self) -> str:
        return json.dumps([[k, v] for k, v in self.entries])

    @classmethod
    def from_json(cls, text: str) -> "WeightedSequence":
        return cls(tuple(tuple(p) for p in json.loads(text)))


@dataclass(frozen=True)
class SequenceSpace:
    """l^p_s: ||f|| = (sum_k (2^(ks) |f_k|)^p)^(1/p)."""

    p: float
    s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "p", _positive("p", self.p, allow_inf=True))
        object.__setattr__(self, "s", float(self.s))

    def weights(self, ks) -> np.ndarray:
        return np.exp2(np.asarray(ks, dtype=float) * self.s)

    def norm_of(self, ks, vals) -> float:
        a = self.weights(ks) * np.abs(np.asarray(vals, dtype=float))
        if a.size == 0:
            return 0.0
        if math.isinf(self.p):
            return float(a.max())
        return float(math.fsum(a**self.p) ** (1 / self.p))

    def norm(self, f: WeightedSequence) -> float:
        return self.norm_of(f.indices, f.values)


@dataclass(frozen=True)
class SpaceCouple:
    x0: SequenceSpace
    x1: SequenceSpace

    @classmethod
    def of(cls, p0, s0, p1, s1) -> "SpaceCouple":
        return cls(SequenceSpace(p0, s0), SequenceSpace(p1, s1))

    @property
    def kind(self) -> str:
        p0, p1 = self.x0.p, self.x1.p
        if p0 == 1 and p1 == 1:
            return "exact (l1 entrywise)"
        if math.isinf(p0) or math.isinf(p1):
            return "unsupported"
        if p0 >= 1 and p1 >= 1:
            return "numerical (per-entry minimization along the Pareto front)"
        if p0 <= 1 and p1 <= 1:
            return "exact (vertex enumeration)"
        return "unsupported"


# --------------------------------------------------------------------------
# K- and J-functionals


def _check_t(t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~(t > 0)) or np.any(~np.isfinite(t)):
        raise ArgumentError("t must be positive and finite")
    return t


def _entry_split(F, A, B, p0, p1, mu):
    """argmin_a A (F - a)^p0 + mu B a^p1 over a in [0, F], entrywise; F >= 0."""
    if p0 == p1:
        with np.errstate(over="ignore", divide="ignore"):
            r = (mu * B / A) ** (1.0 / (p0 - 1.0))
        return F / (1.0 + r)
    # one linear term: the stationarity condition solves in closed form
    if p0 == 1:
        with np.errstate(over="ignore", divide="ignore"):
            a = (A / (mu * p1 * B)) ** (1.0 / (p1 - 1.0))
        return np.minimum(a, F)
    if p1 == 1:
        with np.errstate(over="ignore", divide="ignore"):
            r = (mu * B / (p0 * A)) ** (1.0 / (p0 - 1.0))
        return np.clip(F - r, 0.0, F)
    lo = np.zeros(np.broadcast(F, mu).shape)
    hi = np.broadcast_to(F, lo.shape).copy()
    Fb = np.broadcast_to(F, lo.shape)
    for _ in range(64):
        a = 0.5 * (lo + hi)
        g = -p0 * A * (Fb - a) ** (p0 - 1) + mu * p1 * B * a ** (p1 - 1)
        up = g > 0
        hi = np.where(up, a, hi)
        lo = np.where(up, lo, a)
    return 0.5 * (lo + hi)


def _k_pareto(ks, F, couple: SpaceCouple, t):
    """Both exponents >= 1: walk the Pareto front of the separable problem.

    For each mu the split minimizing ||f0||^p0 + mu ||f1||^p1 is entrywise.
    Along the front the slope condition mu p1 N1^(p1-1) / (p0 N0^(p0-1)) = t
    singles out the minimizer of N0 + t N1; the left side is increasing in mu,
    so the crossing is found by bisection on log(mu).
    """
    p0, p1 = couple.x0.p, couple.x1.p
    w0, w1 = couple.x0.weights(ks), couple.x1.weights(ks)
    A, B = w0**p0, w1**p1
    F = np.abs(F)

    def norms(logmu):
        a = _entry_split(F[None, :], A, B, p0, p1, np.exp(logmu)[:, None])
        n0 = np.sum((w0 * (F - a)) ** p0, axis=1) ** (1 / p0)
        n1 = np.sum((w1 * a) ** p1, axis=1) ** (1 / p1)
        return n0, n1

    # mu range over which some entry is strictly inside (0, F)
    ends = []
    for frac in (1e-15, 1 - 1e-15):
        a = frac * F
        ends.append(np.log(p0 * A) + (p0 - 1) * np.log(F - a) - np.log(p1 * B) - (p1 - 1) * np.log(a))
    lo = np.full(t.shape, min(e.min() for e in ends) - 1.0)
    hi = np.full(t.shape, max(e.max() for e in ends) + 1.0)
    # halve the bracket down to double resolution in log(mu)
    steps = int(np.ceil(np.log2(np.max(hi - lo) / (1e-15 * max(1.0, np.max(np.abs(hi)), np.max(np.abs(lo))))))) + 2
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        n0, n1 = norms(mid)
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.exp(mid) * p1 * n1 ** (p1 - 1) / (p0 * n0 ** (p0 - 1))
        up = ~(slope < t)
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    best = np.full(t.shape, np.inf)
    for x in (lo, hi):
        n0, n1 = norms(x)
        best = np.minimum(best, n0 + t * n1)
    # the endpoint splits (everything in X0 or everything in X1) are always admissible
    return np.minimum(best, np.minimum(couple.x0.norm_of(ks, F), t * couple.x1.norm_of(ks, F)))


def _k_vertices(ks, F, couple: SpaceCouple, t):
    n = F.size
    if n > 16:
        raise ArgumentError("vertex enumeration for quasi-Banach couples is limited to 16 entries")
    best = np.full(t.shape, np.inf)
    for mask in itertools.product((False, True), repeat=n):
        m = np.array(mask, dtype=bool)
        n0 = couple.x0.norm_of(ks[~m], F[~m])
        n1 = couple.x1.norm_of(ks[m], F[m])
        best = np.minimum(best, n0 + t * n1)
    return best


def k_functional(f: WeightedSequence, couple: SpaceCouple, t):
    """K(t, f) = inf over f = f0 + f1 of ||f0||_X0 + t ||f1||_X1.

    l^1 couples are solved exactly entrywise. When both exponents are >= 1 the
    infimum is located on the Pareto front of the separable problem
    ||f0||^p0 + mu ||f1||^p1 by bisection on log(mu) of the slope condition. When both are
    <= 1 the objective is concave on the box of splits, so the minimum sits at
    a vertex and is found by enumeration. Mixed couples are not supported.
    Accepts scalar or array ``t``.
    """
    scalar = np.ndim(t) == 0
    t = _check_t(t)
    ks, F = f.indices, f.values
    if F.size == 0:
        out = np.zeros(t.shape)
    else:
        kind = couple.kind
        if kind.startswith("exact (l1"):
            w0, w1 = couple.x0.weights(ks), couple.x1.weights(ks)
            out = np.sum(np.abs(F) * np.minimum(w0, t[:, None] * w1), axis=1)
        elif kind.startswith("numerical"):
            out = _k_pareto(ks, F, couple, t)
        elif kind.startswith("exact (vertex"):
            out = _k_vertices(ks, np.abs(F), couple, t)
        else:
            raise ArgumentError(f"K-functional not supported for exponents ({couple.x0.p}, {couple.x1.p})")
    return float(out[0]) if scalar else out


def j_functional(f: WeightedSequence, couple: SpaceCouple, t):
    """J(t, f) = max(||f||_X0, t ||f||_X1)."""
    scalar = np.ndim(t) == 0
    t = _check_t(t)
    out = np.maximum(couple.x0.norm(f), t * couple.x1.norm(f))
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# interpolation norms


def _dyadic_sum(kfun, n0: float, n1: float, theta: float, q: float) -> float:
    """(sum_l [2^(-l theta) K(2^l)]^q)^(1/q) over a window grown until the tails are negligible.

    K(2^l) <= min(n0, 2^l n1), so beyond the window the terms are dominated by
    geometric series with ratios 2^(-theta q) and 2^(-(1-theta) q).
    """
    if n0 == 0 or n1 == 0:
        return 0.0
    centre = int(round(math.log2(n0 / n1)))
    lo, hi = centre - 8, centre + 8
    ls = np.arange(lo, hi + 1)
    terms = np.exp2(-ls * theta) * kfun(np.exp2(ls.astype(float)))
    while True:
        right = 2.0 ** (-(hi + 1) * theta) * n0
        left = 2.0 ** ((lo - 1) * (1 - theta)) * n1
        if math.isinf(q):
            value = float(terms.max())
            if max(left, right) <= TAIL_RTOL * value:
                return value
        else:
            value = float(math.fsum(terms**q) ** (1 / q))
            tail = right**q / (1 - 2.0 ** (-theta * q)) + left**q / (1 - 2.0 ** (-(1 - theta) * q))
            if tail <= (TAIL_RTOL * value) ** q:
                return value
        if right > left:
            new = np.arange(hi + 1, hi + 9)
            hi += 8
            terms = np.concatenate([terms, np.exp2(-new * theta) * kfun(np.exp2(new.astype(float)))])
        else:
            new = np.arange(lo - 8, lo)
            lo -= 8
            terms = np.concatenate([np.exp2(-new * theta) * kfun(np.exp2(new.astype(float))), terms])


def interpolation_norm(f: WeightedSequence, couple: SpaceCouple, theta: float, q: float) -> float:
    """Discrete K-method norm with t = 2^l, l in Z (windowed, tails below 1e-10 relative)."""
    theta = float(theta)
    if not (0 < theta < 1):
        raise ArgumentError(f"theta must lie in (0, 1), got {theta}")
    q = _positive("q", q, allow_inf=True)
    return _dyadic_sum(
        lambda t: k_functional(f, couple, t), couple.x0.norm(f), couple.x1.norm(f), theta, q
    )


def spike_interpolation_norm(value: float, k: int, couple: SpaceCouple, theta: float, q: float) -> float:
    """Closed form for a single spike at k in an l^1-type couple: sum over l of geometric pieces."""
    w0 = 2.0 ** (k * couple.x0.s)
    w1 = 2.0 ** (k * couple.x1.s)
    # terms are 2^(-l theta) min(w0, 2^l w1); split at 2^l = w0 / w1
    L = math.log2(w0 / w1)
    l_star = math.floor(L)
    if math.isinf(q):
        cands = [l_star, l_star + 1]
        return abs(value) * max(2.0 ** (-l * theta) * min(w0, 2.0**l * w1) for l in cands)
    # l <= l_star: 2^(l(1-theta)) w1 ; l > l_star: 2^(-l theta) w0
    a = (2.0 ** (l_star * (1 - theta)) * w1) ** q / (1 - 2.0 ** (-(1 - theta) * q))
    b = (2.0 ** (-(l_star + 1) * theta) * w0) ** q / (1 - 2.0 ** (-theta * q))
    return abs(value) * (a + b) ** (1 / q)


@dataclass
class EquivalenceFit:
    theta: float
    q: float
    s: float
    samples: int
    seed: int
    ratio_min: float
    ratio_max: float

    @property
    def constant(self) -> float:
        """Smallest C with every ratio in [1/C, C]."""
        return max(self.ratio_max, 1.0 / self.ratio_min)


def random_sequence(rng, support=(-6, 6), size: int | None = None) -> WeightedSequence:
    lo, hi = support
    n = size if size is not None else int(rng.integers(1, hi - lo + 2))
    ks = rng.choice(np.arange(lo, hi + 1), size=min(n, hi - lo + 1), replace=False)
    vals = rng.standard_normal(ks.size) * np.exp(rng.uniform(-2, 2, ks.size))
    return WeightedSequence.from_arrays(ks.tolist(), vals.tolist())


def fixed_space_equivalence(couple: SpaceCouple, theta: float, q: float, samples: int = 100, seed: int = 0,
                            support=(-6, 6)) -> EquivalenceFit:
    """Ratio ||f||_(X0, X1)_{theta,q} / ||f||_{l^q_s}, s = (1-theta)s0 + theta s1, over random f."""
    if couple.x0.s == couple.x1.s:
        raise ArgumentError("the fixed-space formula needs s0 != s1")
    s = (1 - theta) * couple.x0.s + theta * couple.x1.s
    target = SequenceSpace(q, s)
    rng = stream(seed, 0)
    ratios = []
    for _ in range(samples):
        f = random_sequence(rng, support)
        ratios.append(interpolation_norm(f, couple, theta, q) / target.norm(f))
    return EquivalenceFit(float(theta), float(q), s, int(samples), int(seed), min(ratios), max(ratios))


# --------------------------------------------------------------------------
# Cwikel-type embedding


@dataclass
class EmbeddingCheck:
    max_ratio: float
    min_ratio: float
    samples: int
    seed: int
    exact_outer: bool


def _outer_k(F, ks, inner: SpaceCouple, js, r, s0, s1, t):
    """K(t, F; l^r_s0(X0), l^r_s1(X1)).

    For r = 1 with l^1 inner spaces the couple is a flattened weighted l^1
    couple and K is exact. Otherwise the entrywise reduction
    (sum_k [2^(k s0) K(2^(k(s1-s0)) t, F_k; X)]^r)^(1/r) is used, which is
    equivalent to K up to the quasi-triangle constant.
    """
    rows = []
    for k, row in zip(ks, F):
        fk = WeightedSequence.from_arrays(js.tolist(), row.tolist())
        rows.append(2.0 ** (k * s0) * k_functional(fk, inner, 2.0 ** (k * (s1 - s0)) * t))
    rows = np.array(rows)
    return rows.max(axis=0) if math.isinf(r) else np.sum(rows**r, axis=0) ** (1 / r)


def cwikel_embedding_check(samples: int, seed: int, r: float, s0: float, s1: float, theta: float, q: float,
                           inner: SpaceCouple | None = None, outer_support=(-3, 3), inner_support=(-3, 3)) -> EmbeddingCheck:
    """Max over random f of ||f||_(l^r_s0(X0), l^r_s1(X1))_{theta,q} / ||f||_{l^r_s((X0,X1)_{theta,q})}."""
    r = _positive("r", r, allow_inf=True)
    q = _positive("q", q, allow_inf=True)
    if not (0 < theta < 1):
        raise ArgumentError("theta must lie in (0, 1)")
    if q < r:
        raise ArgumentError("the embedding needs r <= q")
    if s0 == s1:
        raise ArgumentError("need s0 != s1")
    inner = inner or SpaceCouple.of(1, 0, 1, 1)
    s = (1 - theta) * s0 + theta * s1
    ks = np.arange(outer_support[0], outer_support[1] + 1)
    js = np.arange(inner_support[0], inner_support[1] + 1)
    exact = r == 1 and inner.kind.startswith("exact (l1")
    rng = stream(seed, 0)
    ratios = []
    for _ in range(samples):
        mask = rng.uniform(size=(ks.size, js.size)) < 0.4
        mask[rng.integers(ks.size), rng.integers(js.size)] = True
        F = np.where(mask, rng.standard_normal((ks.size, js.size)), 0.0)
        inner_norms = np.array([
            interpolation_norm(WeightedSequence.from_arrays(js.tolist(), row.tolist()), inner, theta, q)
            for row in F
        ])
        embedded = SequenceSpace(r, s).norm_of(ks, inner_norms)
        n0 = SequenceSpace(r, s0).norm_of(ks, [inner.x0.norm_of(js, row) for row in F])
        n1 = SequenceSpace(r, s1).norm_of(ks, [inner.x1.norm_of(js, row) for row in F])
        interp = _dyadic_sum(lambda t: _outer_k(F, ks, inner, js, r, s0, s1, t), n0, n1, theta, q)
        ratios.append(interp / embedded)
    return EmbeddingCheck(max(ratios), min(ratios), int(samples), int(seed), exact)
