"""One pass/fail test per acceptance criterion, at the stated tolerances and time budgets.

Each criterion runs at full size for d in {3, 4, 5} (criterion 1 covers
d = 2..12 itself). Wall-clock budgets are checked here; they never enter the
JSON artifacts, which must be byte-identical across runs.
"""

import json
from fractions import Fraction

import pytest

from arlab import acceptance as acc


def _run(number):
    res = acc.run_criterion(number, acc.DEFAULT_D, seed=0, quick=False)
    print(res.line())
    return res


def _assert_ok(res):
    assert res.passed, json.dumps(acc.clean(res.metrics), indent=1)
    assert res.elapsed_s < res.budget_s, f"{res.elapsed_s:.2f} s exceeds the {res.budget_s} s budget"


def test_criterion_01_exponent_identities():
    res = _run(1)
    _assert_ok(res)
    assert res.metrics["dims"] == "2..12"
    assert res.metrics["failures"] == {}


def test_criterion_02_drury_iteration():
    res = _run(2)
    _assert_ok(res)
    m = res.metrics
    assert m["d3_limit"] == 6
    assert m["d3_theta_min"] == Fraction(3, 5)
    assert m["d4_limit"] == Fraction(29, 4)
    assert all(steps <= 100 for steps in m["steps_below_1e-30"].values())


def test_criterion_03_birkhoff_decomposition():
    res = _run(3)
    _assert_ok(res)
    assert res.metrics["matrices_per_n"] == 100
    assert res.metrics["reconstruction_failures"] == 0
    assert res.metrics["term_bound_holds"]


def test_criterion_04_torsion_closed_forms():
    res = _run(4)
    _assert_ok(res)
    err = res.metrics["max_rel_error"]
    assert max(err[k] for k in ("exponential", "simple_poly", "monomial", "model")) <= 1e-9
    assert err["reparam"] <= 1e-8


def test_criterion_05_offspring_inequalities():
    res = _run(5)
    _assert_ok(res)
    assert res.metrics["samples_per_family_per_d"] == 10**4
    assert min(res.metrics["exponential_min"].values()) >= 1
    assert min(res.metrics["simple_min_over_bound"].values()) >= 1


def test_criterion_06_vandermonde_sublevel_slope():
    res = _run(6)
    _assert_ok(res)
    assert res.metrics["n_mc"] == 10**6
    assert abs(res.metrics["slope"] - 2 / 3) <= 0.1
    assert res.metrics["monotone"]


def test_criterion_07_polynomial_sublevel_lemma():
    res = _run(7)
    _assert_ok(res)
    assert res.metrics["polynomials"] == 200
    assert res.metrics["violations"] == 0


def test_criterion_08_psi_kernel():
    res = _run(8)
    _assert_ok(res)
    m = res.metrics
    assert m["samples"] == 20 and m["n_mc"] == 10**5
    assert m["max_identity_in_error_bars"] <= 3
    assert m["max_mass_in_std_errors"] <= 3
    assert m["bound_violations"] == 0


def test_criterion_09_interpolation_numerics():
    res = _run(9)
    _assert_ok(res)
    m = res.metrics
    assert m["sequences"] == 100 and m["ladder_points"] == 20
    assert all(v == 0 for v in m["ladder_violations"].values())
    assert m["l1_oracle_max_rel_error"] <= 1e-6
    for fit in m["equivalence"].values():
        C = fit["C"]
        assert 1 / C <= fit["ratio_min"] <= fit["ratio_max"] <= C


def test_criterion_10_knapp_optimality():
    res = _run(10)
    _assert_ok(res)
    m = res.metrics
    assert m["max_volume_rel_error"] <= 1e-10
    assert all(abs(v - 1) <= 1e-3 for v in m["limit_ratio_at_h_1e-5"].values())
    assert {k.split()[0] for k in m["limit_ratio_at_h_1e-5"]} == {"exponential", "monomial", "simple_poly"}
    assert m["model_ratio_exactly_one"]


def test_criterion_11_reproducibility(monkeypatch):
    res = _run(11)
    _assert_ok(res)
    assert res.metrics["identical"]
    # the complete quick-mode artifact, repeated under different worker counts
    docs = []
    for threads in ("1", "4", "2"):
        monkeypatch.setenv("ARL_THREADS", threads)
        docs.append(acc.verify_all(acc.DEFAULT_D, seed=7, quick=True).to_json())
    assert docs[0] == docs[1] == docs[2]
    assert json.loads(docs[0])["passed"] is True
