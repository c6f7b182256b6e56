"""Exact rational bookkeeping for the restriction exponents.

Everything here is :class:`fractions.Fraction`; floats are rejected on input.
An infinite exponent is written ``"inf"`` (or ``math.inf``) and enters all
formulas through its reciprocal 0. Indices (``m``) are 0-based.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ArgumentError, ConstraintError

ONE = Fraction(1)


def rat(x) -> Fraction:
    """Exact rational from int, Fraction or a "num/den" string."""
    if isinstance(x, bool):
        raise ArgumentError("booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise ArgumentError(f"cannot parse rational {x!r}") from exc
    raise ArgumentError(f"exact input required (int, Fraction or 'num/den'), got {type(x).__name__} {x!r}")


def recip(q) -> Fraction:
    """1/q with 1/inf = 0."""
    if (isinstance(q, float) and math.isinf(q) and q > 0) or (isinstance(q, str) and q.strip() in ("inf", "oo")):
        return Fraction(0)
    q = rat(q)
    if q == 0:
        raise ArgumentError("exponent 0 has no reciprocal")
    return 1 / q


def fmt(x) -> str:
    """Serialize as "num/den" (inf for reciprocal zero exponents handled by callers)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def fmt_exponent(inv: Fraction) -> str:
    """Format an exponent given by its reciprocal."""
    return "inf" if inv == 0 else fmt(1 / inv)


def conjugate(p) -> Fraction:
    """p' = p/(p-1)."""
    p = rat(p)
    if p == 1:
        raise ArgumentError("p = 1 has conjugate infinity")
    return p / (p - 1)


def _check_dim(d: int, lo: int = 2) -> int:
    if int(d) != d or d < lo:
        raise ArgumentError(f"dimension must be an integer >= {lo}, got {d}")
    return int(d)


def p_endpoint(d: int) -> Fraction:
    d = _check_dim(d)
    return Fraction(d * d + d + 2, d * d + d)


def q_endpoint(d: int) -> Fraction:
    d = _check_dim(d)
    return Fraction(d * d + d + 2, 2)


def sigma(p, d: int) -> Fraction:
    """sigma(p) = 2 p' / (d^2 + d)."""
    return 2 * conjugate(p) / (d * d + d)


# --------------------------------------------------------------------------
# verification traces


@dataclass
class Check:
    constraint: str
    lhs: Fraction
    rhs: Fraction

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs

    def row(self) -> list:
        return [self.constraint, fmt(self.lhs), fmt(self.rhs), "pass" if self.ok else "fail"]


@dataclass
class Trace:
    title: str
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def add(self, constraint: str, lhs, rhs) -> "Trace":
        self.checks.append(Check(constraint, Fraction(lhs), Fraction(rhs)))
        return self

    def extend(self, other: "Trace", prefix: str = "") -> "Trace":
        for c in other.checks:
            self.checks.append(Check(prefix + c.constraint, c.lhs, c.rhs))
        return self

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "ok": self.ok,
            "values": {k: (fmt(v) if isinstance(v, Fraction) else v) for k, v in self.values.items()},
            "checks": [dict(zip(("constraint", "lhs", "rhs", "status"), c.row())) for c in self.checks],
            "notes": list(self.notes),
        }

    def to_markdown(self) -> str:
        lines = [f"### {self.title}", "", "| constraint | lhs | rhs | status |", "|---|---|---|---|"]
        lines += ["| " + " | ".join(c.row()) + " |" for c in self.checks]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["constraint", "lhs", "rhs", "status"])
        for c in self.checks:
            w.writerow(c.row())
        return buf.getvalue()


# --------------------------------------------------------------------------
# endpoint exponents


@dataclass(frozen=True)
class EndpointExponents:
    d: int
    p: Fraction
    Q: Fraction
    p_conjugate: Fraction
    sigma: Fraction
    endpoint_fails: bool  # restricted weak type fails at the endpoint for d = 2

    def trace(self) -> Trace:
        t = Trace(f"endpoint exponents d={self.d}")
        t.values.update(p_d=self.p, Q=self.Q)
        t.add("p_d' = Q", self.p_conjugate, self.Q)
        t.add("sigma(p_d) = p_d", self.sigma, self.p)
        if self.endpoint_fails:
            t.notes.append("d = 2: the restricted weak type estimate fails at the endpoint")
        return t


def endpoint_exponents(d: int) -> EndpointExponents:
    d = _check_dim(d)
    p = p_endpoint(d)
    return EndpointExponents(d, p, q_endpoint(d), conjugate(p), sigma(p, d), d == 2)


def restriction_relation(p, q, d: int) -> Fraction:
    """1/p + d(d+1)/(2q); equals 1 on the scaling line."""
    return recip(p) + Fraction(d * (d + 1), 2) * recip(q)


# --------------------------------------------------------------------------
# doubly stochastic matrices


def _numerators(rows):
    den = math.lcm(*(x.denominator for r in rows for x in r))
    return den, [[x.numerator * (den // x.denominator) for x in r] for r in rows]


@dataclass(frozen=True)
class DSMatrix:
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(rat(x) for x in row) for row in self.entries)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ArgumentError("a DS matrix must be square and nonempty")
        object.__setattr__(self, "entries", rows)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                if not (0 <= x <= 1):
                    raise ConstraintError("entry in [0,1]", f"entry ({i},{j}) = {x} outside [0, 1]", (i, j))
        # sums on integer numerators over the common denominator
        den, num = _numerators(rows)
        for i, r in enumerate(num):
            if sum(r) != den:
                raise ConstraintError("row sum", f"row {i} sums to {sum(rows[i])}", i)
        for j in range(n):
            if sum(r[j] for r in num) != den:
                raise ConstraintError("column sum", f"column {j} sums to {sum(r[j] for r in rows)}", j)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def interior(self) -> bool:
        return all(0 < x < 1 for r in self.entries for x in r)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "DSMatrix") -> "DSMatrix":
        n = self.n
        return DSMatrix(tuple(
            tuple(sum(self.entries[i][k] * other.entries[k][j] for k in range(n)) for j in range(n))
            for i in range(n)
        ))

    def apply(self, v) -> list:
        return [sum(a * rat(x) for a, x in zip(r, v)) for r in self.entries]

    def column(self, j: int) -> list:
        return [r[j] for r in self.entries]

    def convex(self, other: "DSMatrix", lam) -> "DSMatrix":
        """(1 - lam) self + lam other."""
        lam = rat(lam)
        if not 0 <= lam <= 1:
            raise ArgumentError("convex weight must lie in [0, 1]")
        return DSMatrix(tuple(
            tuple((1 - lam) * a + lam * b for a, b in zip(ra, rb))
            for ra, rb in zip(self.entries, other.entries)
        ))

    @classmethod
    def permutation(cls, perm) -> "DSMatrix":
        n = len(perm)
        if sorted(perm) != list(range(n)):
            raise ArgumentError(f"not a permutation of 0..{n - 1}: {perm}")
        return cls(tuple(tuple(ONE if perm[i] == j else Fraction(0) for j in range(n)) for i in range(n)))

    @classmethod
    def balanced(cls, n: int) -> "DSMatrix":
        return cls(tuple(tuple(Fraction(1, n) for _ in range(n)) for _ in range(n)))

    @classmethod
    def combination(cls, terms) -> "DSMatrix":
        """sum lam_i P_{perm_i} from (lam, perm) pairs with sum lam = 1."""
        terms = [(rat(lam), tuple(perm)) for lam, perm in terms]
        n = len(terms[0][1])
        den = math.lcm(*(lam.denominator for lam, _ in terms))
        m = [[0] * n for _ in range(n)]
        for lam, perm in terms:
            w = lam.numerator * (den // lam.denominator)
            for i, j in enumerate(perm):
                m[i][j] += w
        return cls(tuple(tuple(Fraction(x, den) for x in r) for r in m))

    def to_strings(self) -> list:
        return [[fmt(x) for x in r] for r in self.entries]


def random_ds(n: int, rng, terms: int | None = None, denom: int = 97) -> DSMatrix:
    """A random rational DS matrix built as a hidden convex combination of permutations."""
    terms = terms or n + 2
    w = [int(x) + 1 for x in rng.integers(0, denom, size=terms)]
    tot = sum(w)
    perms = [tuple(int(v) for v in rng.permutation(n)) for _ in range(terms)]
    return DSMatrix.combination([(Fraction(wi, tot), p) for wi, p in zip(w, perms)])


def _augment(row, support, match_col, seen) -> bool:
    for col in support[row]:
        if col in seen:
            continue
        seen.add(col)
        if match_col[col] is None or _augment(match_col[col], support, match_col, seen):
            match_col[col] = row
            return True
    return False


def birkhoff_decompose(a: DSMatrix) -> list:
    """Exact Birkhoff-von Neumann decomposition into (coefficient, permutation) terms.

    A perfect matching on the support is found by augmenting paths, rows and
    columns scanned in lexicographic order. The minimum matched entry is
    subtracted, edges that drop to zero leave the matching, and the matching
    is repaired rather than rebuilt. Every step shrinks the support, hence the
    smallest face of the Birkhoff polytope containing the remainder, so there
    are at most (n-1)^2 + 1 terms.
    """
    if not isinstance(a, DSMatrix):
        a = DSMatrix(a)
    n = a.n
    # integer numerators over the common denominator keep the loop exact and fast
    den, rem = _numerators(a.entries)
    match_col: list = [None] * n
    out = []
    total = den
    support = [[j for j in range(n) if rem[i][j] > 0] for i in range(n)]
    while total > 0:
        matched_rows = {r for r in match_col if r is not None}
        for row in range(n):
            if row not in matched_rows and not _augment(row, support, match_col, set()):
                raise RuntimeError("no perfect matching on the support of a doubly stochastic remainder")
        perm = [0] * n
        for col, row in enumerate(match_col):
            perm[row] = col
        lam = min(rem[i][perm[i]] for i in range(n))
        for i in range(n):
            j = perm[i]
            rem[i][j] -= lam
            if rem[i][j] == 0:
                support[i].remove(j)
                match_col[j] = None
        out.append((Fraction(lam, den), tuple(perm)))
        total -= lam
    return out


def reconstruct(terms, n: int) -> list:
    """sum lam P_perm as a list of Fraction rows."""
    if not terms:
        return [[Fraction(0)] * n for _ in range(n)]
    den = math.lcm(*(Fraction(lam).denominator for lam, _ in terms))
    m = [[0] * n for _ in range(n)]
    for lam, perm in terms:
        lam = Fraction(lam)
        w = lam.numerator * (den // lam.denominator)
        for i, j in enumerate(perm):
            m[i][j] += w
    return [[Fraction(x, den) for x in r] for r in m]


# --------------------------------------------------------------------------
# the interpolation theorem targets


@dataclass(frozen=True)
class Targets:
    s: list
    theta: list


def interpolation_targets(delta, m: int, r, q, A: DSMatrix, B: DSMatrix) -> Targets:
    """s = B A delta and theta = B A e_m, with every hypothesis checked."""
    delta = [rat(x) for x in delta]
    n = len(delta)
    if not (0 <= m < n):
        raise ArgumentError(f"m must be an index in 0..{n - 1}")
    inv_q = [recip(x) for x in q]
    inv_r = recip(r)
    if len(inv_q) != n or A.n != n or B.n != n:
        raise ArgumentError("delta, q, A and B must share the size n")
    if sum(inv_q) != inv_r:
        raise ConstraintError("sum 1/q_i = 1/r", f"sum of 1/q_i is {sum(inv_q)}, 1/r is {inv_r}")
    others = [x for i, x in enumerate(delta) if i != m]
    if len(set(others)) <= 1:
        raise ConstraintError("delta_i (i != m) not all equal", "the delta_i with i != m are all equal")
    if not A.interior:
        bad = next((i, j) for i in range(n) for j in range(n) if not 0 < A[i, j] < 1)
        raise ConstraintError("A interior", f"A entry {bad} is not in (0, 1)", bad)
    col = B.column(m)
    for i in range(n):
        if col[i] != r_over(inv_q[i], inv_r):
            raise ConstraintError("B e_m = (r/q_i)", f"B[{i},{m}] = {col[i]}, expected r/q_{i}", i)
    BA = B @ A
    s = BA.apply(delta)
    theta = BA.column(m)
    for i, t in enumerate(theta):
        if not 0 < t < 1:
            raise ConstraintError("theta_i in (0,1)", f"theta_{i} = {t}", i)
    if sum(theta) != 1:
        raise ConstraintError("sum theta_i = 1", f"sum theta = {sum(theta)}")
    return Targets(s, theta)


def r_over(inv_q: Fraction, inv_r: Fraction) -> Fraction:
    """r / q = (1/q) / (1/r)."""
    return inv_q / inv_r


# --------------------------------------------------------------------------
# multilinear bookkeeping


@dataclass
class MultilinearResult:
    inv_p: list
    beta: list
    trace: Trace

    @property
    def p(self) -> list:
        return [None if x == 0 else 1 / x for x in self.inv_p]


def multilinear_system(d: int, eta, q, rho) -> MultilinearResult:
    """1/p_i and beta_i from (eta, q, rho), with both sum identities checked exactly."""
    d = _check_dim(d)
    Q = q_endpoint(d)
    Qc = conjugate(Q)
    eta = [rat(x) for x in eta]
    inv_q = [recip(x) for x in q]
    inv_rho = [recip(x) for x in rho]
    if not (len(eta) == len(inv_q) == len(inv_rho) == d):
        raise ArgumentError(f"eta, q and rho need {d} entries each")
    if sum(inv_q) != 1 / Q:
        raise ConstraintError("sum 1/q_i = 1/Q", f"sum 1/q_i = {sum(inv_q)}, 1/Q = {1 / Q}")
    if sum(inv_rho) != Fraction(1, 2):
        raise ConstraintError("sum 1/rho_i = 1/2", f"sum 1/rho_i = {sum(inv_rho)}")
    if sum(eta) != 1:
        raise ConstraintError("sum eta_i = 1", f"sum eta_i = {sum(eta)}")
    for i in range(d):
        if inv_rho[i] > Fraction(1, 2) or inv_rho[i] < 0:
            raise ConstraintError("rho_i >= 2", f"rho_{i} < 2", i)
        if inv_q[i] > 1 / Q or inv_q[i] < 0:
            raise ConstraintError("q_i >= Q", f"q_{i} < Q", i)
        if not 0 <= eta[i] <= 1:
            raise ConstraintError("eta_i in [0,1]", f"eta_{i} = {eta[i]}", i)
    a, b = Fraction(d - 2, d + 2), Fraction(4, d + 2)
    inv_p = [a * iq + b * ir for iq, ir in zip(inv_q, inv_rho)]
    beta = [a * (1 - e / Qc) + Fraction(3 - d, d + 2) for e in eta]
    tr = Trace(f"multilinear exponents d={d}")
    tr.add("sum 1/p_i = d/Q", sum(inv_p), d / Q)
    tr.add("sum beta_i = d/Q", sum(beta), d / Q)
    return MultilinearResult(inv_p, beta, tr)


def symmetric_choice(d: int):
    """q_i = Qd, rho_i = 2d, eta_i = 1/d."""
    Q = q_endpoint(d)
    return [Fraction(1, d)] * d, [Q * d] * d, [Fraction(2 * d)] * d


def mu_bound(d: int) -> Fraction:
    return 1 / (10 * q_endpoint(d) * d * d)


@dataclass
class MuFamily:
    d: int
    n: int
    mu: Fraction
    inv_q: list
    inv_p: list
    trace: Trace


def mu_family(d: int, n: int, mu) -> MuFamily:
    """The one-parameter perturbation of the symmetric q_i (rho_i = 2d throughout)."""
    d = _check_dim(d, 3)
    n = int(n)
    if n < max(d, 3):
        raise ArgumentError(f"n must be >= max(d, 3), got {n}")
    mu = rat(mu)
    if not abs(mu) < mu_bound(d):
        raise ConstraintError("|mu| < 1/(10 Q d^2)", f"|mu| = {abs(mu)} not below {mu_bound(d)}")
    Q = q_endpoint(d)
    base = 1 / (Q * d)
    q1 = base - mu * (d + 2) * Fraction(n - 1, n - 2)
    q2 = base + mu * Fraction(d + 2, n - 2)
    q3 = base + mu * Fraction(d + 2, d - 2)
    inv_q = [q1, q2] + [q3] * (d - 2)
    eta, _, rho = symmetric_choice(d)
    res = multilinear_system(d, eta, [1 / x if x else "inf" for x in inv_q], rho)
    p1, p2, p3 = res.inv_p[0], res.inv_p[1], res.inv_p[2]
    tr = Trace(f"mu family d={d} n={n} mu={fmt(mu)}")
    tr.add("sum 1/q_i = 1/Q", sum(inv_q), 1 / Q)
    tr.extend(res.trace)
    tr.add("1/p_3 = 1/Q + mu", p3, 1 / Q + mu)
    tr.add("1/p_2 = 1/Q + mu (d-2)/(n-2)", p2, 1 / Q + mu * Fraction(d - 2, n - 2))
    tr.add("1/p_1 = 1/Q - mu (d-2)(n-1)/(n-2)", p1, 1 / Q - mu * Fraction((d - 2) * (n - 1), n - 2))
    tr.add("1/p_2 = (d-2)/(n-2) 1/p_3 + (n-d)/(n-2) 1/Q", p2,
           Fraction(d - 2, n - 2) * p3 + Fraction(n - d, n - 2) / Q)
    tr.add("(n-1)/(n p_2) + 1/(n p_1) = 1/Q", Fraction(n - 1, n) * p2 + p1 / n, 1 / Q)
    if mu > 0:
        tr.values["ordering"] = "q_3 < q_2 < Qd < q_1, p_3 < p_2 < Q < p_1"
        ordered = (q3 > q2 > base > q1) and (p3 > p2 > 1 / Q > p1)
        tr.add("ordering holds (1 = yes)", int(ordered), 1)
    return MuFamily(d, n, mu, inv_q, res.inv_p, tr)


def default_eta(d: int) -> list:
    """Symmetric eta nudged so that delta_2 != delta_3."""
    d = _check_dim(d, 3)
    Q = q_endpoint(d)
    eps = 1 / (100 * d * Q)
    base = Fraction(1, d)
    return [base, base + eps] + [base - eps / (d - 2)] * (d - 2)


def sn_bookkeeping(d: int, n: int, eta=None, mu=0) -> Trace:
    """The chain sn = delta_1 + delta_2 + (n-2) delta_3 = n/Q, hence s = 1/Q."""
    d = _check_dim(d, 3)
    Q = q_endpoint(d)
    if not n > Q:
        raise ConstraintError("n > Q", f"n = {n} must exceed Q = {Q} so that r = Q/n < 1")
    tr = Trace(f"sn bookkeeping d={d} n={n}")
    eta = [Fraction(1, d)] * d if eta is None else [rat(x) for x in eta]
    if len(eta) != d or sum(eta) != 1:
        raise ConstraintError("sum eta_i = 1", "eta must have d entries summing to 1")
    if len(set(eta[2:])) > 1:
        raise ConstraintError("eta_3 = ... = eta_d", "the chain needs eta_3 = ... = eta_d")
    fam = mu_family(d, n, mu)
    _, _, rho = symmetric_choice(d)
    res = multilinear_system(d, eta, [1 / x for x in fam.inv_q], rho)
    beta = res.beta
    delta3 = Fraction(d - 2, n - 2) * beta[2] + Fraction(n - d, n - 2) / Q
    if beta[1] == delta3:
        eta = default_eta(d)
        tr.notes.append("delta_2 = delta_3 for the given eta; switched to the default perturbation")
        res = multilinear_system(d, eta, [1 / x for x in fam.inv_q], rho)
        beta = res.beta
        delta3 = Fraction(d - 2, n - 2) * beta[2] + Fraction(n - d, n - 2) / Q
    deltas = [beta[0], beta[1]] + [delta3] * (n - 2)
    sn = sum(deltas)
    tr.values.update(eta=[fmt(x) for x in eta], delta_1=beta[0], delta_2=beta[1], delta_3=delta3, s=sn / n, r=Q / n)
    tr.add("delta_2 != delta_3 (1 = yes)", int(beta[1] != delta3), 1)
    tr.add("sn = beta_1 + beta_2 + (d-2) beta_3 + (n-d)/Q", sn, beta[0] + beta[1] + (d - 2) * beta[2] + Fraction(n - d) / Q)
    tr.add("sn = d/Q + (n-d)/Q", sn, Fraction(n) / Q)
    tr.add("s = 1/Q", sn / n, 1 / Q)
    tr.add("(n-1)/(n p_2) + 1/(n p_1) = 1/Q", Fraction(n - 1, n) * fam.inv_p[1] + fam.inv_p[0] / n, 1 / Q)
    return tr


# --------------------------------------------------------------------------
# balancing and the final exponent


@dataclass(frozen=True)
class Monomial:
    """alpha^a Gamma^g Delta^e, tracked by its exact exponents."""

    a: Fraction
    g: Fraction
    e: Fraction

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self.a + other.a, self.g + other.g, self.e + other.e)

    def __pow__(self, k) -> "Monomial":
        k = Fraction(k)
        return Monomial(self.a * k, self.g * k, self.e * k)


def balance_lambda(d: int) -> Trace:
    """Balance alpha^-2 L^((d-2)/d) Gamma^2 against alpha^-Q L^(-2Q/d) Delta^Q.

    The balancing Lambda is (alpha^(2-Q) Delta^Q / Gamma^2)^(d/(d-2+2Q)); both
    sides are compared as exact exponent vectors after substitution.
    """
    d = _check_dim(d, 3)
    Q = q_endpoint(d)
    D = d - 2 + 2 * Q
    lam = Monomial(2 - Q, Fraction(-2), Q) ** Fraction(d, D)
    left = Monomial(Fraction(-2), Fraction(2), Fraction(0)) * lam ** Fraction(d - 2, d)
    right = Monomial(-Q, Fraction(0), Q) * lam ** Fraction(-2 * Q, d)
    k = Fraction((d + 2) * Q, D)
    bound = Monomial(Fraction(-1), Fraction(4, d + 2), Fraction(d - 2, d + 2)) ** k
    tr = Trace(f"balancing d={d}")
    tr.values.update(Q=Q, balancing_exponent=Fraction(d) / D)
    tr.values["Lambda"] = f"(alpha^(2-Q) Delta^Q / Gamma^2)^({fmt(Fraction(d) / D)})"
    for name, x, y in (("alpha", left.a, right.a), ("Gamma", left.g, right.g), ("Delta", left.e, right.e)):
        tr.add(f"balanced terms agree in {name}", x, y)
    for name, x, y in (("alpha", left.a, bound.a), ("Gamma", left.g, bound.g), ("Delta", left.e, bound.e)):
        tr.add(f"balanced term = (alpha^-1 Delta^((d-2)/(d+2)) Gamma^(4/(d+2)))^((d+2)Q/(d-2+2Q)) in {name}", x, y)
    tr.add("(d+2)Q/(d-2+2Q) = Q/d", k, Q / d)
    tr.add("(1 - (d-2)/(d(d+2)))^-1 / d = (d+2)/(d^2+d+2)",
           1 / (1 - Fraction(d - 2, d * (d + 2))) / d, Fraction(d + 2, d * d + d + 2))
    return tr


def lambda_balances(d: int, gamma_power, delta_power) -> bool:
    """Whether Lambda = (alpha^(2-Q) Gamma^gamma_power Delta^delta_power)^(d/(d-2+2Q)) balances."""
    Q = q_endpoint(d)
    D = d - 2 + 2 * Q
    lam = Monomial(2 - Q, rat(gamma_power), rat(delta_power)) ** Fraction(d, D)
    left = Monomial(Fraction(-2), Fraction(2), Fraction(0)) * lam ** Fraction(d - 2, d)
    right = Monomial(-Q, Fraction(0), Q) * lam ** Fraction(-2 * Q, d)
    return left == right


# --------------------------------------------------------------------------
# the bootstrap iteration


@dataclass
class DruryResult:
    d: int
    p: list  # p_0, p_1, ...
    limit: Fraction
    theta_min: Fraction
    contraction: Fraction
    offset: Fraction
    monotone: bool
    fixed_point_residual: Fraction

    @property
    def inv_residuals(self) -> list:
        return [abs(1 / pj - 1 / self.limit) for pj in self.p]


def drury_limit(d: int) -> Fraction:
    return Fraction(d**3 - 3 * d + 6, d * d - 3 * d + 4)


def drury_theta_min(d: int) -> Fraction:
    return Fraction((d - 2) * (d + 1) * d, (d + 2) * (d * d - 3 * d + 4))


def drury_iteration(d: int, p0, max_iter: int = 100, stop_below=None) -> DruryResult:
    """Exact iteration 1/p_(j+1) = c/p_j + e toward (d^3-3d+6)/(d^2-3d+4).

    Stops early once |1/p_j - 1/limit| < stop_below (a rational), if given.
    """
    d = _check_dim(d, 3)
    p0 = rat(p0)
    if not p0 > 1:
        raise ArgumentError("p0 must exceed 1")
    c = Fraction(8, (d + 1) * (d + 2) * (d * d - 3 * d + 4))
    e = Fraction(d, (d + 1) * (d + 2))
    limit = drury_limit(d)
    stop = rat(stop_below) if stop_below is not None else None
    ps = [p0]
    for _ in range(max_iter):
        if stop is not None and abs(1 / ps[-1] - 1 / limit) < stop:
            break
        ps.append(1 / (c / ps[-1] + e))
    inv = [1 / x for x in ps]
    diffs = [b - a for a, b in zip(inv, inv[1:])]
    monotone = all(x >= 0 for x in diffs) or all(x <= 0 for x in diffs)
    residual = c / limit + e - 1 / limit
    return DruryResult(d, ps, limit, drury_theta_min(d), c, e, monotone, residual)


def drury_step_pair(d: int, p0, theta) -> tuple:
    """(p, q) produced by one interpolation step at parameter theta from (p0, q0) on the scaling line."""
    d = _check_dim(d, 3)
    p0, theta = rat(p0), rat(theta)
    if not 0 < theta < 1:
        raise ArgumentError("theta must lie in (0, 1)")
    inv_q0 = (1 - 1 / p0) * Fraction(2, d * (d + 1))
    inv_s0 = inv_q0 + Fraction(1, 2)
    inv_s = (1 - theta) * inv_s0 + theta * Fraction(2, d + 1)
    inv_a = (1 - theta) / p0
    inv_t = (1 - theta) * Fraction(3 - d, 4) + theta * Fraction(1, d)
    inv_q = inv_s / (d + 1)
    inv_p = (inv_a + d * inv_t) / (d + 1)
    return 1 / inv_p, 1 / inv_q


# --------------------------------------------------------------------------
# everything at once


def verify_exponents(d: int, n: int | None = None, mu=None) -> Trace:
    """All exact identities for dimension d in one trace."""
    d = _check_dim(d)
    ep = endpoint_exponents(d)
    Q = ep.Q
    tr = Trace(f"exponent identities d={d}")
    tr.values.update(p_d=ep.p, Q=Q)
    tr.add("p_d = (d^2+d+2)/(d^2+d)", ep.p, Fraction(d * d + d + 2, d * d + d))
    tr.add("Q = (d^2+d+2)/2", Q, Fraction(d * d + d + 2, 2))
    tr.extend(ep.trace())
    tr.add("(d+2)Q/(d-2+2Q) = Q/d", (d + 2) * Q / (d - 2 + 2 * Q), Q / d)
    tr.add("final exponent = (d+2)/(d^2+d+2)",
           1 / (1 - Fraction(d - 2, d * (d + 2))) / d, Fraction(d + 2, d * d + d + 2))
    tr.add("scaling line 1/p + d(d+1)/(2q) = 1 at p = q = Q", restriction_relation(Q, Q, d), 1)
    eta, q, rho = symmetric_choice(d)
    sym = multilinear_system(d, eta, q, rho)
    tr.extend(sym.trace, "symmetric: ")
    tr.add("symmetric: p_i = Q", sym.inv_p[0], 1 / Q)
    tr.add("symmetric: beta_i = 1/Q", sym.beta[0], 1 / Q)
    if ep.endpoint_fails:
        tr.notes.extend(ep.trace().notes)
    if d >= 3:
        n = n or int(Q) + 1
        mu = rat(mu) if mu is not None else mu_bound(d) / 2
        tr.extend(mu_family(d, n, mu).trace, "mu family: ")
        tr.extend(balance_lambda(d), "balancing: ")
        tr.extend(sn_bookkeeping(d, n, None, mu), "bookkeeping: ")
    else:
        tr.notes.append("d = 2: the mu family divides by d-2 and is skipped")
    return tr
