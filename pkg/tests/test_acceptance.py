"""Acceptance criteria 1-9, one test each.

Each test stores ``(passed, detail)`` in ``RESULTS``; the terminal summary
hook in ``conftest.py`` prints one PASS/FAIL line per criterion.
"""

import time
from functools import lru_cache

import numpy as np
import pytest

from chemofront.grid import make_grid
from chemofront.params import CoefficientField, ModelParams
from chemofront.scenarios import builtin_scenarios, run_suite
from chemofront.stepper import StepConfig, initial_state, step

RESULTS = {}


@lru_cache(maxsize=None)
def suite(name):
    start = time.perf_counter()
    report = run_suite(builtin_scenarios(name, seed=0), workers=1)
    return report, time.perf_counter() - start


def by_name(report):
    return {sc["name"]: sc for sc in report["scenarios"]}


def check(report_scenario, check_name):
    return next(c for c in report_scenario["checks"] if c["name"] == check_name)


def record(number, ok, detail):
    RESULTS[number] = (bool(ok), detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_1_constants_reductions():
    report, elapsed = suite("constants")
    measured = report["scenarios"][0]["checks"][0]["measured"]
    ok = report["passed"] and measured["samples"] >= 1000 and measured["mismatches"] == 0 and elapsed < 1.0
    record(1, ok, f"{measured['mismatches']} mismatches in {measured['samples']} draws, {elapsed:.2f} s")


def test_criterion_2_elliptic_oracle():
    report, elapsed = suite("chemical-estimates")
    sc = by_name(report)
    oracle = sc["oracle-agreement"]["checks"][0]["measured"]["max_error"]
    orders = sc["refinement-order"]["checks"][0]["measured"]["orders"]
    ok = oracle <= 1e-5 and all(abs(o - 2.0) <= 0.2 for o in orders) and elapsed < 30.0
    record(2, ok, f"oracle max error {oracle:.2e}, orders {np.round(orders, 3).tolist()}, suite {elapsed:.1f} s")


def test_criterion_3_chemical_estimates():
    report, elapsed = suite("chemical-estimates")
    sc = by_name(report)
    parts = {}
    for name in ("imbalance-estimate", "difference-estimate", "difference-estimate-tied-rates"):
        rep = sc[name]["checks"][0]
        parts[name] = (rep["passed"], rep["measured"]["max_excess"], rep["tolerances"]["abs"])
    ok = all(p for p, _, _ in parts.values()) and elapsed < 60.0
    detail = ", ".join(f"{k} excess {e:.2e} (tol {t:.1e})" for k, (_, e, t) in parts.items())
    record(3, ok, detail)


def test_criterion_4_global_bound():
    report, elapsed = suite("global-bound")
    asserted = [s for s in report["scenarios"] if not s["options"].get("negative_control")]
    passed = [s for s in asserted if s["status"] == "pass" and s["hypotheses"]["H1"] and s["t_end"] >= 50.0]
    ok = len(passed) >= 5 and not any(s["status"] in ("fail", "error") for s in asserted) and elapsed < 120.0
    record(4, ok, f"{len(passed)} of {len(asserted)} H1 configurations within bounds at t_end = 50, {elapsed:.1f} s")


def test_criterion_5_persistence_corridor():
    report, elapsed = suite("persistence")
    passed = [s for s in report["scenarios"] if s["status"] == "pass" and s["hypotheses"]["H2"]]
    ok = len(passed) >= 3 and report["passed"] and elapsed < 120.0
    t_star = [round(check(s, "persistence")["measured"]["T_star"], 6) for s in passed]
    record(5, ok, f"{len(passed)} H2 configurations held the corridor, entry times {t_star}, {elapsed:.1f} s")


def test_criterion_6_periodic_convergence():
    report, elapsed = suite("convergence")
    sc = by_name(report)
    runs = [sc[n] for n in ("periodic-flat-start", "periodic-gaussian-start", "periodic-piecewise-start")]
    reps = [check(s, "convergence") for s in runs]
    rho = runs[0]["bounds"]["rho"]
    finals = [r["measured"]["final_error"] for r in reps]
    ratios = [r["measured"]["max_ratio"] for r in reps]
    ok = (all(s["status"] == "pass" for s in runs) and abs(rho - 0.3 / 0.7) < 1e-12
          and max(finals) < 1e-4 and all(q is not None and q <= rho + 0.1 for q in ratios) and elapsed < 180.0)
    record(6, ok, f"final errors max {max(finals):.2e}, envelope ratios max {max(ratios):.3f} "
                  f"vs rho + 0.1 = {rho + 0.1:.3f}, {elapsed:.1f} s")


def test_criterion_7_reflection():
    report, elapsed = suite("reflection")
    errs = [check(s, "reflection")["measured"]["max_error"] for s in report["scenarios"]]
    ok = report["passed"] and max(errs) <= 1e-3 and elapsed < 60.0
    record(7, ok, f"max restriction error {max(errs):.2e} at t = 10, {elapsed:.1f} s")


def test_criterion_8_free_boundary():
    report, elapsed = suite("free-boundary")
    sc = by_name(report)
    monotone = all(check(s, "fronts")["passed"] for s in report["scenarios"])
    consistency = check(sc["interior-equilibrium"], "fixed-domain-consistency")["measured"]["max_error"]
    symmetric = sc["double-front-symmetric"]
    gap = check(symmetric, "symmetry")["measured"]["max_gap"]
    ok = (report["passed"] and monotone and consistency <= 1e-3 and gap <= 1e-8 and symmetric["t_end"] >= 10.0
          and elapsed < 120.0)
    record(8, ok, f"fronts monotone on {len(report['scenarios'])} runs, consistency {consistency:.2e}, "
                  f"|g + h| max {gap:.2e}, {elapsed:.1f} s")


def mass_drift_per_step(scheme):
    g = make_grid("half_line", 40.0, 400)
    p = ModelParams(chi1=0.5, chi2=0.2, lambda1=1.0, lambda2=2.0, mu1=1.0, mu2=1.0)
    coeffs = CoefficientField.constant(0.0, 0.0)
    state = initial_state(g, 0.5 + np.exp(-((g.x - 5.0) ** 2) / 2.0), p)
    cfg = StepConfig(scheme=scheme)
    worst = 0.0
    m = g.integrate(state.u)
    for _ in range(200):
        state = step(g, state, coeffs, p, cfg)
        m_new = g.integrate(state.u)
        worst = max(worst, abs(m_new - m) / m)
        m = m_new
    return worst


def test_criterion_9_scheme_health():
    drift = {s: mass_drift_per_step(s) for s in ("imex", "explicit")}
    clip_ratio = 0.0
    n_runs = 0
    for name in ("global-bound", "persistence", "convergence", "reflection", "truncation", "free-boundary"):
        for sc in suite(name)[0]["scenarios"]:
            if sc["status"] not in ("pass",):
                continue
            for c in sc["checks"]:
                if c["name"] == "scheme-health":
                    n_runs += 1
                    mass = c["measured"]["final_mass"]
                    if c["measured"]["clip_mass"] > 0.0:
                        clip_ratio = max(clip_ratio, c["measured"]["clip_mass"] / mass)
    ok = max(drift.values()) <= 1e-10 and clip_ratio < 1e-8
    record(9, ok, f"mass drift per step imex {drift['imex']:.1e}, explicit {drift['explicit']:.1e}; "
                  f"clip/mass max {clip_ratio:.1e} over {n_runs} accepted runs")
