"""Command-line front end: ``arlab <group> <command> [options]``.

Exit codes: 0 success, 2 when a checked inequality or identity fails,
1 on usage errors (bad arguments, malformed input, unmet preconditions).
Outputs carry ``"schema": 1`` and the seed; wall-clock metadata goes to a
``<out>.meta.json`` sidecar so artifacts stay byte-identical across runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import acceptance, curves, exponents, geometry, knapp, lorentz
from .acceptance import SCHEMA, clean
from .curves import Curve, OffspringSpec
from .errors import ArlabError
from .streams import stream

CURVE_SCHEMA = {
    "type": "object",
    "required": ["family", "interval", "dim"],
    "additionalProperties": False,
    "properties": {
        "family": {"enum": list(curves.FAMILIES)},
        "params": {"type": "array", "items": {"type": "number"}},
        "interval": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "dim": {"type": "integer", "minimum": 2},
    },
}

SEQUENCE_SCHEMA = {
    "type": "object",
    "patternProperties": {"^-?[0-9]+$": {"type": "number"}},
    "additionalProperties": False,
}


class UsageError(Exception):
    """Bad command line or input file; exit code 1."""


@dataclass
class Output:
    result: dict
    definitions: dict = field(default_factory=dict)
    rows: list | None = None  # list of dicts for --format csv
    failed: bool = False
    sidecar: dict = field(default_factory=dict)  # merged into <out>.meta.json


# --------------------------------------------------------------------------
# argument helpers


def _load_json(text: str):
    """Inline JSON, or @path to read it from a file."""
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text()
        except OSError as e:
            raise UsageError(f"cannot read {text[1:]}: {e.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"malformed JSON: {e}") from None


def load_curve(text: str) -> Curve:
    obj = _load_json(text)
    try:
        jsonschema.validate(obj, CURVE_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise UsageError(f"curve schema violation at {where}: {e.message}") from None
    return Curve.from_dict(obj)


def floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def exact_list(text: str) -> list:
    """Comma-separated exact values: integers, fractions a/b, decimals, or inf."""
    out = []
    for tok in (x.strip() for x in text.split(",")):
        if tok == "inf":
            out.append("inf")
        elif tok:
            out.append(exponents.rat(tok))
    return out


def ladder(text: str, default_points: int) -> list:
    """'a:b' or 'a:b:n' as a geometric ladder, or a comma list."""
    if ":" in text:
        parts = text.split(":")
        try:
            a, b = float(parts[0]), float(parts[1])
            n = int(parts[2]) if len(parts) > 2 else default_points
        except (ValueError, IndexError):
            raise UsageError(f"bad ladder {text!r}; use lo:hi[:points]") from None
        if a <= 0 or b <= 0 or n < 2:
            raise UsageError("ladder ends must be positive with at least 2 points")
        return list(np.geomspace(a, b, n))
    return floats(text)


def count(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(v)


def _couple(text: str) -> lorentz.SpaceCouple:
    v = floats(text)
    if len(v) != 4:
        raise UsageError("--couple needs p0,s0,p1,s1")
    return lorentz.SpaceCouple.of(*v)


def _sequence(text: str) -> lorentz.WeightedSequence:
    obj = _load_json(text)
    try:
        jsonschema.validate(obj, SEQUENCE_SCHEMA)
    except jsonschema.ValidationError as e:
        raise UsageError(f"sequence schema violation: {e.message}") from None
    return lorentz.WeightedSequence({int(k): float(v) for k, v in obj.items()})


def _ds(obj) -> exponents.DSMatrix:
    return exponents.DSMatrix(tuple(tuple(exponents.rat(x) for x in row) for row in obj))


# --------------------------------------------------------------------------
# handlers


def _curve_rows(ts, vals, name):
    vals = np.asarray(vals)
    if vals.ndim == 1:
        return [{"t": t, name: v} for t, v in zip(ts, vals)]
    return [{"t": t, **{f"{name}{i + 1}": x for i, x in enumerate(row)}} for t, row in zip(ts, vals)]


def h_curve_eval(a):
    c = load_curve(a.curve)
    ts = floats(a.t)
    v = curves.position(c, ts) if a.j == 0 else curves.derivative(c, ts, a.j)
    return Output(
        {"curve": c.to_dict(), "t": ts, "j": a.j, "values": np.asarray(v).tolist()},
        {"values": f"gamma^({a.j})(t), one row per t, coordinates in curve units"},
        _curve_rows(ts, v, "x"),
    )


def h_curve_torsion(a):
    c = load_curve(a.curve)
    ts = floats(a.t)
    det = np.atleast_1d(curves.torsion(c, ts))
    cf = np.atleast_1d(curves.torsion_closed_form(c, ts))
    return Output(
        {"curve": c.to_dict(), "t": ts, "torsion": det.tolist(), "closed_form": cf.tolist()},
        {"torsion": "det(gamma'(t), ..., gamma^(d)(t)) by LU", "closed_form": "per-family closed-form torsion"},
        [{"t": t, "torsion": x, "closed_form": y} for t, x, y in zip(ts, det, cf)],
    )


def h_curve_weight(a):
    c = load_curve(a.curve)
    ts = floats(a.t)
    w = np.atleast_1d(curves.affine_weight(c, ts))
    return Output(
        {"curve": c.to_dict(), "t": ts, "weight": w.tolist(), "exponent": curves.weight_exponent(c.dim)},
        {"weight": "w(t) = |tau(t)|^(2/(d^2+d)), dimensionless"},
        [{"t": t, "weight": x} for t, x in zip(ts, w)],
    )


def h_hyp_jacobian(a):
    c = load_curve(a.curve)
    rep = geometry.check_jacobian_bound(c, a.n, a.seed, a.bins)
    rows = [{"bin_lo": lo, "bin_hi": hi, "count": n} for lo, hi, n in zip(rep.bin_edges, rep.bin_edges[1:], rep.counts)]
    return Output(
        rep.to_dict(),
        {"minimum": "min over samples of |J(t)| / ((prod |tau(t_i)|)^(1/d) |V(t)|)", "count": "samples per ratio bin"},
        rows,
        failed=rep.degenerate,
    )


def h_hyp_offspring(a):
    c = load_curve(a.curve)
    k = OffspringSpec(tuple(floats(a.kappa)))
    lo, hi = c.interval
    grid = np.linspace(lo - k.kappa[0], hi - k.kappa[-1], a.grid)
    res = geometry.check_offspring_torsion(c, k, grid)
    out = {"kappa": list(k.kappa), "min_ratio": res.min_ratio, "evaluated": res.evaluated, "skipped": res.skipped,
           "bound": a.bound}
    failed = a.bound is not None and not res.min_ratio >= a.bound
    return Output(out, {"min_ratio": "min over grid of |tau_kappa(t)| / max_j |tau(t + kappa_j)|"}, [out], failed)


def h_hyp_multiplicity(a):
    c = load_curve(a.curve)
    rep = geometry.multiplicity_probe(c, a.n, a.seed, a.tol)
    return Output(rep.to_dict(), {"flag": "falsifier outcome; a collision disproves multiplicity one"},
                  [{"flag": rep.flag, "pairs": rep.pairs}], rep.flag == geometry.COLLISION)


def h_sublevel_vdm(a):
    alphas = ladder(a.alpha_ladder, 6)
    fit = geometry.sublevel_slope_fit(a.d, alphas, a.box, a.n, a.seed)
    res = fit.to_dict()
    rows = [{"alpha": x, "estimate": e, "std_error": s} for x, e, s in zip(fit.alphas, fit.estimates, fit.std_errors)]
    return Output(res, {
        "estimate": "Monte Carlo volume of {x in [-R,R]^d : |V(x)| < alpha}",
        "slope": "least-squares slope of log estimate against log alpha",
    }, rows, failed=not fit.monotone)


def h_sublevel_poly(a):
    r = geometry.polynomial_sublevel_check(exact_list(a.coeffs), exponents.rat(a.a), exponents.rat(a.b),
                                           exponents.rat(a.eps))
    out = {"measured": r.measured, "bound": r.bound, "degree": r.degree, "holds": r.holds}
    return Output(out, {"measured": "|{t in (a,b): |p(t)| < eps |p(b)|}|", "bound": "2 N eps^(1/(2N)) (b-a)"},
                  [out], not r.holds)


def h_psi_check(a):
    r = geometry.psi_kernel_checks(floats(a.phi), floats(a.s), a.n, a.seed)
    ok = (r.identity_discrepancy <= 3 * r.combined_error and r.mass_discrepancy <= 3 * r.psi_mass_se
          and r.bound_violations == 0)
    rows = [{"u": u, "psi": p, "psi_se": e} for u, p, e in zip(r.nodes, r.psi, r.psi_se)]
    return Output(r.to_dict(), {
        "direct": "det J_d(s; phi)", "integral": "int phi^(d) Psi, Monte Carlo plus Gauss-Legendre",
        "psi": "kernel value at quadrature node u", "psi_mass_target": "c_d V(s)",
    }, rows, not ok)


def h_interp_k(a, fn=lorentz.k_functional, name="K"):
    f, cp = _sequence(a.seq), _couple(a.couple)
    ts = ladder(a.t, 20)
    v = np.atleast_1d(fn(f, cp, np.asarray(ts)))
    return Output({"t": ts, name: v.tolist(), "method": cp.kind},
                  {name: f"{name}(t, f) for the couple (l^p0_s0, l^p1_s1)"},
                  [{"t": t, name: x} for t, x in zip(ts, v)])


def h_interp_j(a):
    return h_interp_k(a, lorentz.j_functional, "J")


def h_interp_norm(a):
    f, cp = _sequence(a.seq), _couple(a.couple)
    q = math.inf if a.q == "inf" else float(a.q)
    v = lorentz.interpolation_norm(f, cp, a.theta, q)
    out = {"theta": a.theta, "q": a.q, "norm": v}
    return Output(out, {"norm": "(sum_l [2^(-l theta) K(2^l, f)]^q)^(1/q)"}, [out])


def h_interp_embed(a):
    r = lorentz.cwikel_embedding_check(a.samples, a.seed, a.r, a.s0, a.s1, a.theta, a.q)
    out = {"max_ratio": r.max_ratio, "min_ratio": r.min_ratio, "samples": r.samples, "exact_outer": r.exact_outer}
    return Output(out, {"max_ratio": "max of outer interpolation norm over l^r_s of inner norms"}, [out])


def _trace_out(tr: exponents.Trace) -> Output:
    rows = [dict(zip(("constraint", "lhs", "rhs", "status"), c.row())) for c in tr.checks]
    return Output(tr.to_dict(), {"lhs": "exact rational", "rhs": "exact rational"}, rows, not tr.ok)


def h_exp_endpoints(a):
    return _trace_out(exponents.endpoint_exponents(a.d).trace())


def h_exp_birkhoff(a):
    if a.matrix:
        m = _ds(_load_json(a.matrix))
    else:
        m = exponents.random_ds(a.random, stream(a.seed, 0))
    terms = exponents.birkhoff_decompose(m)
    recon = exponents.reconstruct(terms, m.n)
    ok = recon == [list(r) for r in m.entries] and len(terms) <= (m.n - 1) ** 2 + 1
    out = {"matrix": m.to_strings(), "terms": [{"coefficient": exponents.fmt(c), "permutation": list(p)} for c, p in terms],
           "count": len(terms), "bound": (m.n - 1) ** 2 + 1, "exact_reconstruction": ok}
    rows = [{"coefficient": exponents.fmt(c), "permutation": " ".join(map(str, p))} for c, p in terms]
    return Output(out, {"coefficient": "exact weight of the permutation matrix"}, rows, not ok)


def h_exp_targets(a):
    t = exponents.interpolation_targets(exact_list(a.delta), a.m, exact_list(a.r)[0], exact_list(a.q),
                                    _ds(_load_json(a.A)), _ds(_load_json(a.B)))
    out = {"s": [exponents.fmt(x) for x in t.s], "theta": [exponents.fmt(x) for x in t.theta]}
    return Output(out, {"s": "B A delta", "theta": "B A e_m"},
                  [{"i": i, "s": s, "theta": th} for i, (s, th) in enumerate(zip(out["s"], out["theta"]))])


def h_exp_multilinear(a):
    if a.eta is None:
        eta, q, rho = exponents.symmetric_choice(a.d)
    else:
        eta, q, rho = exact_list(a.eta), exact_list(a.q), exact_list(a.rho)
    res = exponents.multilinear_system(a.d, eta, q, rho)
    o = _trace_out(res.trace)
    o.result["inv_p"] = [exponents.fmt(x) for x in res.inv_p]
    o.result["beta"] = [exponents.fmt(x) for x in res.beta]
    return o


def h_exp_balance(a):
    return _trace_out(exponents.balance_lambda(a.d))


def h_exp_drury(a):
    r = exponents.drury_iteration(a.d, exponents.rat(a.p0), a.max_iter)
    out = {"limit": exponents.fmt(r.limit), "theta_min": exponents.fmt(r.theta_min), "monotone": r.monotone,
           "p": [exponents.fmt(x) for x in r.p[: a.show]], "steps": len(r.p) - 1,
           "final_inv_residual": float(r.inv_residuals[-1])}
    rows = [{"j": j, "p_j": float(p), "inv_residual": float(e)} for j, (p, e) in enumerate(zip(r.p, r.inv_residuals))]
    return Output(out, {"p_j": "iterate p_j", "inv_residual": "|1/p_j - 1/limit|"}, rows,
                  not r.monotone or r.fixed_point_residual != 0)


def h_exp_sn(a):
    return _trace_out(exponents.sn_bookkeeping(a.d, a.n, None, exponents.rat(a.mu)))


def h_knapp_scan(a):
    c = load_curve(a.curve)
    reps = knapp.knapp_ratio_scan(c, a.t, ladder(a.h_ladder, 5), a.quad_n)
    rows = [r.to_dict() for r in reps]
    return Output({"curve": c.to_dict(), "reports": rows}, {
        "volume": "|P(h,t)|", "curve_measure": "affine measure of the curve inside P",
        "e2_ratio": "curve_measure / volume^(2/(d^2+d))", "limit_ratio": "mean of w on [t,t+h] / w(t)",
    }, rows)


def _f_source(a):
    if a.f:
        obj = _load_json(a.f)
        return (obj["grid"], obj["values"])
    return lambda t: np.ones_like(t)


def _xs(a, d):
    if a.x:
        x = floats(a.x)
        if len(x) % d:
            raise UsageError(f"--x needs a multiple of {d} values")
        return np.asarray(x).reshape(-1, d)
    R, n = a.grid.split(":")
    g = np.linspace(-float(R), float(R), int(n))
    return np.stack(np.meshgrid(*([g] * d), indexing="ij"), axis=-1).reshape(-1, d)


def h_ext_eval(a):
    c = load_curve(a.curve)
    xs = _xs(a, c.dim)
    vals = knapp.extension_field(c, _f_source(a), xs, a.quad_n)
    rows = [{**{f"x{i + 1}": x for i, x in enumerate(row)}, "re": v.value.real, "im": v.value.imag,
             "abs": abs(v.value), "error": v.error} for row, v in zip(xs, vals)]
    return Output({"curve": c.to_dict(), "points": rows}, {
        "re": "Re E_w f(x)", "im": "Im E_w f(x)", "error": "change under panel halving",
    }, rows)


def h_ext_weaknorm(a):
    c = load_curve(a.curve)
    if not a.grid:
        raise UsageError("ext weaknorm needs --grid R:n")
    R, n = a.grid.split(":")
    xs = _xs(a, c.dim)
    cell = (2 * float(R) / (int(n) - 1)) ** c.dim
    vals = knapp.extension_field(c, _f_source(a), xs, a.quad_n)
    Q = float(a.Q) if a.Q else float(exponents.q_endpoint(c.dim))
    est = knapp.weak_norm_estimate([v.value for v in vals], cell, Q)
    out = {"Q": Q, "weak_norm_lower_estimate": est, "cells": len(vals), "cell_volume": cell}
    return Output(out, {"weak_norm_lower_estimate": "max_v v * |{|E f| >= v}|^(1/Q) on the sampled box (lower bound)"},
                  [out])


def h_verify_all(a):
    d_list = [int(x) for x in a.d.split(",") if x.strip()] if a.d is not None else list(acceptance.DEFAULT_D)
    if not d_list:
        raise UsageError("empty d list")
    only = [int(x) for x in a.only.split(",")] if a.only else None
    s = acceptance.verify_all(d_list, a.seed, a.quick, only)
    print(s.table(), file=sys.stderr)
    res = json.loads(s.to_json())
    rows = [{"criterion": r.number, "name": r.name, "passed": r.passed} for r in s.results]
    o = Output(res, {"passed": "criterion outcome at the stated tolerances"}, rows, not s.passed)
    o.sidecar = json.loads(s.sidecar())
    return o


def h_verify_exponents(a):
    return _trace_out(exponents.verify_exponents(a.d))


# --------------------------------------------------------------------------
# parser


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="64-bit seed, echoed into the output")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--quick", action="store_true", help="reduced sample counts")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    root = Parser(prog="arlab", description="Numerics for restriction to curves with affine arclength measure.")
    groups = root.add_subparsers(dest="group", metavar="group", parser_class=Parser)
    groups.required = True

    def group(name, help):
        g = groups.add_parser(name, help=help)
        sub = g.add_subparsers(dest="command", metavar="command", parser_class=Parser)
        sub.required = True
        return sub

    def cmd(sub, name, handler, help, curve=False):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(handler=handler)
        if curve:
            p.add_argument("--curve", required=True, help="curve JSON, or @file")
        return p

    g = group("curve", "curve evaluation")
    p = cmd(g, "eval", h_curve_eval, "position or j-th derivative", True)
    p.add_argument("--t", required=True)
    p.add_argument("--j", type=int, default=0)
    for name, h in (("torsion", h_curve_torsion), ("weight", h_curve_weight)):
        cmd(g, name, h, f"curve {name}", True).add_argument("--t", required=True)

    g = group("hyp", "geometric hypotheses")
    p = cmd(g, "jacobian", h_hyp_jacobian, "Jacobian lower bound", True)
    p.add_argument("--n", type=count, default=10**4)
    p.add_argument("--bins", type=int, default=20)
    p = cmd(g, "offspring", h_hyp_offspring, "offspring torsion ratio", True)
    p.add_argument("--kappa", required=True)
    p.add_argument("--grid", type=count, default=100)
    p.add_argument("--bound", type=float)
    p = cmd(g, "multiplicity", h_hyp_multiplicity, "multiplicity falsifier", True)
    p.add_argument("--n", type=count, default=10**4)
    p.add_argument("--tol", type=float, default=1e-9)

    g = group("sublevel", "sublevel-set estimates")
    p = cmd(g, "vdm", h_sublevel_vdm, "Vandermonde sublevel slope")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--alpha-ladder", default="1e-6:1e-2:6")
    p.add_argument("--n", type=count, default=10**6)
    p.add_argument("--box", type=float, default=1.0)
    p = cmd(g, "poly", h_sublevel_poly, "polynomial sublevel lemma")
    p.add_argument("--coeffs", required=True, help="lowest degree first")
    p.add_argument("--a", default="0")
    p.add_argument("--b", default="1")
    p.add_argument("--eps", required=True)

    g = group("psi", "Psi kernel")
    p = cmd(g, "check", h_psi_check, "kernel identities")
    p.add_argument("--phi", required=True, help="polynomial coefficients, lowest first")
    p.add_argument("--s", required=True)
    p.add_argument("--n", type=count, default=10**5)

    g = group("interp", "interpolation numerics")
    for name, h in (("k", h_interp_k), ("j", h_interp_j)):
        p = cmd(g, name, h, f"{name.upper()}-functional")
        p.add_argument("--seq", required=True, help='JSON {"k": value}, or @file')
        p.add_argument("--couple", required=True, help="p0,s0,p1,s1")
        p.add_argument("--t", default="1e-3:1e3:20")
    p = cmd(g, "norm", h_interp_norm, "real interpolation norm")
    p.add_argument("--seq", required=True)
    p.add_argument("--couple", required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--q", default="2")
    p = cmd(g, "embed", h_interp_embed, "embedding ratio")
    p.add_argument("--samples", type=count, default=20)
    for name, default in (("r", 1.0), ("s0", 0.0), ("s1", 1.0), ("theta", 0.5), ("q", 2.0)):
        p.add_argument(f"--{name}", type=float, default=default)

    g = group("exp", "exact exponent calculus")
    cmd(g, "endpoints", h_exp_endpoints, "p_d, Q and conjugates").add_argument("--d", type=int, required=True)
    p = cmd(g, "birkhoff", h_exp_birkhoff, "Birkhoff decomposition")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="JSON rows of exact entries, or @file")
    src.add_argument("--random", type=int, help="random DS matrix of this size")
    p = cmd(g, "targets", h_exp_targets, "s = BA delta and theta = BA e_m")
    for name in ("delta", "r", "q", "A", "B"):
        p.add_argument(f"--{name}", required=True)
    p.add_argument("--m", type=int, required=True, help="0-based index")
    p = cmd(g, "multilinear", h_exp_multilinear, "multilinear exponent system")
    p.add_argument("--d", type=int, required=True)
    for name in ("eta", "q", "rho"):
        p.add_argument(f"--{name}")
    cmd(g, "balance", h_exp_balance, "Lambda balancing").add_argument("--d", type=int, required=True)
    p = cmd(g, "drury", h_exp_drury, "Drury iteration")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p0", default="2")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--show", type=int, default=5, help="iterates printed exactly")
    p = cmd(g, "sn", h_exp_sn, "sn bookkeeping")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu", default="0")

    g = group("knapp", "Knapp examples")
    p = cmd(g, "scan", h_knapp_scan, "ratio scan over an h ladder", True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--h-ladder", default="1e-1:1e-5:5")
    p.add_argument("--quad-n", type=int, default=200)

    g = group("ext", "extension operator")
    for name, h in (("eval", h_ext_eval), ("weaknorm", h_ext_weaknorm)):
        p = cmd(g, name, h, f"extension {name}", True)
        p.add_argument("--x", help="flat list of points, d values each")
        p.add_argument("--grid", help="R:n, the cube [-R,R]^d sampled n points per axis")
        p.add_argument("--f", help='JSON {"grid": [...], "values": [...]}, or @file; default f = 1')
        p.add_argument("--quad-n", type=int)
    p.add_argument("--Q", help="weak-type exponent (default Q for the curve dimension)")

    g = group("verify", "acceptance suites")
    p = cmd(g, "all", h_verify_all, "full acceptance suite")
    p.add_argument("--d", help="comma list of dimensions (default 3,4,5)")
    p.add_argument("--only", help="comma list of criterion numbers")
    cmd(g, "exponents", h_verify_exponents, "exact exponent identities").add_argument("--d", type=int, required=True)
    return root


def _rewrite(argv: list) -> list:
    # `sublevel --d ...` is shorthand for `sublevel vdm --d ...`
    if len(argv) >= 2 and argv[0] == "sublevel" and argv[1].startswith("-") and argv[1] not in ("-h", "--help"):
        return ["sublevel", "vdm"] + argv[1:]
    return argv


def render(out: Output, args) -> str:
    command = f"{args.group} {args.command}"
    if args.format == "csv":
        rows = out.rows if out.rows is not None else [out.result]
        rows = [clean(r) for r in rows]
        cols = list(dict.fromkeys(k for r in rows for k in r))
        buf = io.StringIO()
        buf.write(f"# schema: {SCHEMA}\n# command: {command}\n# seed: {args.seed}\n")
        for k in cols:
            if k in out.definitions:
                buf.write(f"# {k}: {out.definitions[k]}\n")
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
        return buf.getvalue()
    body = {"schema": SCHEMA, "command": command, "seed": args.seed, "definitions": out.definitions,
            "result": out.result}
    return json.dumps(clean(body), sort_keys=True, indent=1) + "\n"


def main(argv=None) -> int:
    argv = _rewrite(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    started = time.time()
    try:
        out = args.handler(args)
    except (UsageError, ArlabError, ValueError, KeyError) as e:
        # malformed numbers and missing JSON keys in input files are usage errors too
        print(f"arlab: error: {e}", file=sys.stderr)
        return 1
    text = render(out, args)
    if args.out:
        Path(args.out).write_text(text)
        meta = {"argv": argv, "started": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
                "elapsed_s": round(time.time() - started, 4)}
        meta.update(out.sidecar)
        Path(args.out + ".meta.json").write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    else:
        sys.stdout.write(text)
    return 2 if out.failed else 0


if __name__ == "__main__":
    sys.exit(main())
