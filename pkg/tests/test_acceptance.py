"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import io
import time
from fractions import Fraction

import numpy as np
import pytest

from biasbound import cli
from biasbound import classify as cl
from biasbound import oracle
from biasbound.measures import (LinearParams, LogisticParams, SelectionModel,
                                TargetJoint, fit_linear, inter_rd, inter_rr,
                                selected_or, true_or)
from biasbound.sensitivity import IntervalEstimate, bound_report

from conftest import EXAMPLE, EXAMPLE_MODIFIED, random_pairs


@pytest.fixture
def gate(capsys):
    def _gate(number, label, ok, detail=""):
        with capsys.disabled():
            status = "PASS" if ok else "FAIL"
            print(f"\n{status} criterion {number}: {label}"
                  + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"
    return _gate


def test_c1_example_exactness(gate):
    a = inter_rr(SelectionModel(*EXAMPLE))
    b = inter_rr(SelectionModel(*EXAMPLE_MODIFIED))
    rd_a = inter_rd(SelectionModel(*map(Fraction, ("0.8", "0.6", "0.4", "0.1"))))
    rd_b = inter_rd(SelectionModel(*map(Fraction, ("0.8", "0.6", "0.4", "0.25"))))
    ok = (abs(a - 1 / 3) <= 1e-12 and abs(b - 5 / 6) <= 1e-12
          and rd_a == Fraction(-1, 10) and rd_b == Fraction(1, 20))
    gate(1, "Example 1 exactness", ok,
         f"inter_rr={a!r}, {b!r}; inter_rd={rd_a}, {rd_b}")


def test_c2_example_classification(gate):
    v = cl.classify(cl.derive_assumptions(SelectionModel(*EXAMPLE), "rd"))
    mod = SelectionModel(*EXAMPLE_MODIFIED)
    am = cl.derive_assumptions(mod, "rd")
    vm = cl.classify(am)
    ok = (v.direction is cl.Direction.LOWER and v.applied_result == "R4a"
          and am.interaction_sign is cl.InteractionSign.NON_NEGATIVE
          and vm.direction is cl.Direction.INDETERMINATE
          and inter_rr(mod) < 1)
    gate(2, "Example 1 classification and non-necessity", ok,
         f"{v.direction.value}/{v.applied_result}; modified "
         f"{am.interaction_sign.value} -> {vm.direction.value}, "
         f"inter_rr={inter_rr(mod):.6f}")


def test_c3_lower_bound_statement(gate):
    a = cl.QualitativeAssumptions.parse("NonDecreasing", "NonDecreasing",
                                        "RiskRatio", "NonPositive")
    rep = bound_report(IntervalEstimate(1.42, 1.42, 1.42), cl.classify(a))
    ok = (rep["or_true_lower"] == 1.42 and rep["or_true_upper"] is None
          and rep["statement"].startswith("OR_true ≥ 1.42"))
    gate(3, "bound statement for an observed OR of 1.42", ok, rep["statement"])


def test_c4_decomposition(gate):
    t0 = time.perf_counter()
    worst = 0.0
    for target, sel in random_pairs(10_000, seed=2024):
        s = selected_or(target, sel)
        worst = max(worst, abs(s - true_or(target) * inter_rr(sel)) / s)
    elapsed = time.perf_counter() - t0
    gate(4, "decomposition identity over 10^4 pairs",
         worst <= 1e-10 and elapsed < 5.0,
         f"max rel residual {worst:.2e}, {elapsed:.2f} s")


def test_c5_result_suite(gate):
    t0 = time.perf_counter()
    bad = []
    for rid in oracle.RESULT_IDS:
        cfg = oracle.SamplerConfig(count=100_000, seed=11, constraint=rid)
        rep = oracle.verify_result(rid, cfg)
        if rep.violations or rep.models_tested != 100_000:
            bad.append(f"{rid}:{rep.violations}/{rep.models_tested}")
    elapsed = time.perf_counter() - t0
    gate(5, "11 results x 10^5 models, zero violations",
         not bad and elapsed < 60.0,
         f"{elapsed:.2f} s" + (f"; failures {bad}" if bad else ""))


def test_c6_parametric_identities(gate):
    rng = np.random.default_rng(6)
    log_worst = 0.0
    for b in rng.uniform(-3, 3, size=(10_000, 3)):
        chk = oracle.check_logistic_identity(LogisticParams(*b, 0.0))
        log_worst = max(log_worst, chk.residual)
    directional_ok, applicable = True, 0
    for b in rng.uniform(-3, 3, size=(10_000, 4)):
        if b[3] == 0.0:
            continue
        chk = oracle.check_logistic_identity(LogisticParams(*b))
        applicable += chk.applicable
        directional_ok &= chk.passed
    lin_worst = 0.0
    for cells in rng.uniform(1e-6, 1.0, size=(10_000, 4)):
        g = fit_linear(SelectionModel(*map(float, cells)))
        lin_worst = max(lin_worst, oracle.check_linear_identity(LinearParams(*g)).residual)
    ok = log_worst <= 1e-12 and directional_ok and applicable > 0 and lin_worst <= 1e-12
    gate(6, "logistic and linear identities", ok,
         f"logistic {log_worst:.2e}, directional {applicable} applicable, "
         f"linear {lin_worst:.2e}")


def test_c7_recoding_duality(gate):
    rng = np.random.default_rng(7)
    flip = {cl.Direction.LOWER: cl.Direction.UPPER,
            cl.Direction.UPPER: cl.Direction.LOWER,
            cl.Direction.EQUAL: cl.Direction.EQUAL,
            cl.Direction.INDETERMINATE: cl.Direction.INDETERMINATE}
    worst, mismatches, bounded = 0.0, 0, 0
    scales = ("rr", "or", "rd")
    for i, cells in enumerate(rng.uniform(1e-3, 1 - 1e-3, size=(1000, 4))):
        sel = SelectionModel(*map(float, cells))
        rec = cl.recode(sel, "E")
        worst = max(worst, abs(inter_rr(rec) * inter_rr(sel) - 1.0))
        scale = scales[i % 3]
        v = cl.classify(cl.derive_assumptions(sel, scale)).direction
        w = cl.classify(cl.derive_assumptions(rec, scale)).direction
        mismatches += flip[v] is not w
        bounded += v in (cl.Direction.LOWER, cl.Direction.UPPER)
    gate(7, "recoding duality over 10^3 models",
         worst <= 1e-10 and mismatches == 0 and bounded > 0,
         f"max |product-1| {worst:.2e}, {mismatches} mismatches, "
         f"{bounded} bounded verdicts")


def test_c8_simulator(gate):
    sim = oracle.simulate_study(TargetJoint(0.25, 0.25, 0.25, 0.25),
                                SelectionModel(*EXAMPLE), 1_000_000, seed=20240)
    rel = abs(sim.empirical_selected_or - 1 / 3) / (1 / 3)
    gate(8, "simulator convergence at n=10^6", rel <= 0.05,
         f"empirical {sim.empirical_selected_or:.5f}, rel err {rel:.3%}")


def test_c9_determinism(gate):
    outs = []
    for workers in ("1", "1", "4"):
        buf = io.StringIO()
        code = cli.run(["verify", "--result", "R2a", "--n", "100000",
                        "--seed", "42", "--workers", workers], stdout=buf)
        outs.append((code, buf.getvalue()))
    ok = all(o == outs[0] for o in outs) and outs[0][0] == 0
    gate(9, "byte-identical verify reports across runs and workers", ok,
         f"{len(outs[0][1])} bytes")
