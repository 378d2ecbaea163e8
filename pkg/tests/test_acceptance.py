"""Exit criteria of the package, one test per criterion.

Each test prints a single PASS/FAIL line (value, tolerance, runtime against
its budget); the lines are collected again in the pytest terminal summary.
Run standalone with ``python -m tests.test_acceptance``.
"""

import itertools
import json
import time
from pathlib import Path

import numpy as np
import pytest

from casimir_phases import (Limits, QuadratureConfig, Scenario, ScenarioWindow, additivity_report, coherence_matrix,
                            extract_dp12, magnitude_report, phi_dp_first_order, phi_dp_retarded,
                            phi_sp_first_order, phi_sp_retarded, sodium_like)
from casimir_phases import cli
from casimir_phases.config import build_scenario, set_path
from casimir_phases.core import C_LIGHT
from casimir_phases.trajectory import linear, piecewise, static

pytestmark = pytest.mark.acceptance

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
ATOM = sodium_like()
Z0 = 20e-9
# 3 (omega0/c) vol * 1/2 * (1/(2 z0)^2 - 1/(2 z0 + v T)^2) for z0 = 20 nm,
# v = 1e5 m/s, T = 1e-13 s; 50-digit evaluation.
DP_CLOSED_FORM = 8.682006269817502e-08

_LINES: dict[str, str] = {}


def summary_lines() -> list[str]:
    return [_LINES[k] for k in sorted(_LINES, key=str)]


def report(key, title, ok, detail, started, budget):
    elapsed = time.perf_counter() - started
    passed = bool(ok) and elapsed < budget
    name = f"criterion {key}" if isinstance(key, int) else key
    line = (f"{'PASS' if passed else 'FAIL'}  {name}: {title} | {detail} | "
            f"{elapsed:.2f} s (budget {budget:g} s)")
    _LINES[f"{key:02d}" if isinstance(key, int) else key] = line
    print(line)
    return passed


def doc(name):
    return json.loads((CONFIGS / name).read_text())


def fitted_exponent(x, y):
    return float(np.polyfit(np.log(x), np.log(np.abs(y)), 1)[0])


def linear_family(v, T, margin=1e-15):
    win = ScenarioWindow(T, margin)
    return static(Z0, win.domain_end), linear(Z0, v, win.domain_end), win


def test_c01_quasi_static_cancellation():
    t0 = time.perf_counter()
    base = doc("static_three_arm.json")
    worst = 0.0
    for method in ("first_order", "retarded"):
        sc = build_scenario(set_path(base, "run.dp_method", method))
        worst = max(worst, float(np.max(np.abs(coherence_matrix(sc).dp))))
    tol = QuadratureConfig().abs_tol
    assert report(1, "quasi-static DP cancellation", worst <= tol,
                  f"max |dp| = {worst:.3g} rad (tol {tol:g})", t0, 1.0)


def test_c02_closed_form_dp():
    t0 = time.perf_counter()
    j, k, win = linear_family(1e5, 1e-13)
    got = phi_dp_first_order(ATOM, j, k, win).value
    rel = abs(got / DP_CLOSED_FORM - 1)
    assert report(2, "first-order DP vs closed form", rel <= 1e-9,
                  f"dp = {got:.12e} rad, rel err {rel:.2e} (tol 1e-9)", t0, 1.0)


def test_c03_retarded_vs_first_order_scaling():
    # Family exactly as stated: z0 = 20 nm, T = 1e-13 s, v in {0.25, 0.5, 1} x 1e6 m/s.
    t0 = time.perf_counter()
    vs = np.array([0.25e6, 0.5e6, 1e6])
    diffs = []
    for v in vs:
        j, k, win = linear_family(v, 1e-13)
        diffs.append(phi_dp_retarded(ATOM, j, k, win).value - phi_dp_first_order(ATOM, j, k, win).value)
    p = fitted_exponent(vs, diffs)
    assert report(3, "|retarded - first order| ~ v^2", abs(p - 2.0) <= 0.1,
                  f"fitted exponent {p:.4f} (target 2.0 +- 0.1); diffs {', '.join(f'{d:.3e}' for d in diffs)}",
                  t0, 10.0)


def test_c03_diagnostic_small_excursion():
    # Not a criterion: with v T << z0 the path integral no longer depends on v.
    t0 = time.perf_counter()
    vs = np.array([0.25e6, 0.5e6, 1e6])
    diffs = []
    for v in vs:
        j, k, win = linear_family(v, 1e-15)
        diffs.append(phi_dp_retarded(ATOM, j, k, win).value - phi_dp_first_order(ATOM, j, k, win).value)
    p = fitted_exponent(vs, diffs)
    assert report("03b diagnostic (not a criterion)", "criterion 3 fit with T = 1e-15 s (v T <= 1 nm)", abs(p - 2.0) <= 0.1,
                  f"fitted exponent {p:.4f}", t0, 10.0)


def test_c04_endpoint_law():
    t0 = time.perf_counter()
    T, z1 = 1e-13, 40e-9
    win = ScenarioWindow(T, 1e-15)
    end = win.domain_end
    dz = z1 - Z0
    hold = {"t_start": T, "t_end": end, "coeffs": [z1]}
    paths = {
        "linear": piecewise([{"t_start": 0.0, "t_end": T, "coeffs": [Z0, dz / T]},
                             {"t_start": T, "t_end": end, "coeffs": [z1, dz / T]}]),
        "smoothstep": piecewise([{"t_start": 0.0, "t_end": T,
                                  "coeffs": [Z0, 0.0, 3 * dz / T**2, -2 * dz / T**3]}, hold]),
        "overshoot": piecewise([{"t_start": 0.0, "t_end": T,
                                 "coeffs": [Z0, 3 * dz / T, -2 * dz / T**2]},
                                {"t_start": T, "t_end": end, "coeffs": [z1, -dz / T]}]),
    }
    corr = {name: phi_sp_first_order(ATOM, p, win).sp_dynamical for name, p in paths.items()}
    closed = 1.5 * ATOM.c3_over_hbar / C_LIGHT * (1 / z1**2 - 1 / Z0**2)
    pair = max(abs(a / b - 1) for a, b in itertools.combinations(corr.values(), 2))
    vs_closed = max(abs(c / closed - 1) for c in corr.values())
    assert report(4, "SP correction depends on endpoints only", pair <= 1e-8 and vs_closed <= 1e-8,
                  f"max pairwise rel diff {pair:.2e}, vs closed form {vs_closed:.2e} (tol 1e-8)", t0, 5.0)


def test_c05_coarse_graining_second_order():
    t0 = time.perf_counter()
    vs = np.array([1e6, 0.5e6, 0.25e6])
    diffs = []
    for v in vs:
        _, k, win = linear_family(v, 1e-15)
        diffs.append(phi_sp_retarded(ATOM, k, win).sp_dynamical - phi_sp_first_order(ATOM, k, win).sp_dynamical)
    ratios = [diffs[i] / diffs[i + 1] for i in range(2)]
    p = fitted_exponent(vs, diffs)
    assert report(5, "retarded vs first-order SP differ at O(beta^2)", abs(p - 2.0) <= 0.1,
                  f"halving ratios {ratios[0]:.3f}, {ratios[1]:.3f}; fitted exponent {p:.4f} (2.0 +- 0.1)",
                  t0, 5.0)


def test_c06_additivity():
    t0 = time.perf_counter()
    reports = [additivity_report(coherence_matrix(build_scenario(doc("three_arm_extraction.json"))))]
    T = 1e-13
    win = ScenarioWindow(T, 1e-15)
    arms = (linear(20e-9, 1e5, win.domain_end), linear(35e-9, -5e4, win.domain_end),
            static(60e-9, win.domain_end))
    sc = Scenario(ATOM, arms, win, dp_method="retarded", limits=Limits(short_distance_max=10.0))
    reports.append(additivity_report(coherence_matrix(sc)))
    ok = all(r.standard_additive and r.bookkeeping_ok for r in reports)
    detail = "; ".join(f"{name}: std {r.max_standard_residual:.2e} <= {r.standard_tolerance:.2e}, "
                       f"bookkeeping {r.max_bookkeeping_error:.2e} <= {r.bookkeeping_tolerance:.2e}"
                       for name, r in zip(("three_arm/first_order", "linear/retarded"), reports))
    assert report(6, "standard additivity and DP bookkeeping", ok, detail, t0, 5.0)


def test_c07_extraction_protocol():
    t0 = time.perf_counter()
    base = doc("three_arm_extraction.json")
    ext = extract_dp12(coherence_matrix(build_scenario(base)))
    z3 = np.geomspace(400e-9, 4e-6, 6)
    errs = [extract_dp12(coherence_matrix(build_scenario(set_path(base, "trajectories.2.z0", float(z))))).relative_error
            for z in z3]
    slope = fitted_exponent(z3, errs)
    ok = ext.relative_error <= 5e-3 and abs(slope + 3.0) <= 0.2
    assert report(7, "three-arm extraction", ok,
                  f"rel err {ext.relative_error:.3e} (<= 5e-3); z3 slope {slope:.3f} (-3.0 +- 0.2)", t0, 30.0)


def test_c08_invariances():
    t0 = time.perf_counter()
    base = doc("three_arm_extraction.json")
    ref = coherence_matrix(build_scenario(base)).dp[0, 1]
    dil = max(abs(coherence_matrix(build_scenario(set_path(base, "run.time_dilation", lam))).dp[0, 1] / ref - 1)
              for lam in (0.5, 2.0, 10.0))

    pair = set_path(doc("linear_pair_retarded.json"), "numerics.quad.rel_tol", 1e-13)
    dp0 = coherence_matrix(build_scenario(pair)).dp[0, 1]
    vpar = np.array([2.5e5, 5e5, 1e6])
    devs = [coherence_matrix(build_scenario(set_path(pair, "trajectories.*.parallel_velocity", float(v)))).dp[0, 1]
            - dp0 for v in vpar]
    p = fitted_exponent(vpar, devs)
    ok = dil <= 1e-9 and abs(p - 2.0) <= 0.1
    assert report(8, "time-dilatation and parallel-drift invariance", ok,
                  f"dilatation rel change {dil:.2e} (<= 1e-9); drift exponent {p:.4f} (2.0 +- 0.1)", t0, 10.0)


def test_c09_magnitude():
    t0 = time.perf_counter()
    sc = build_scenario(doc("magnitude_sodium.json"))
    mags = magnitude_report(sc)
    ok = 1e-7 <= mags.dp_scale <= 1e-4
    assert report(9, "DP magnitude for sodium near 20-40 nm", ok,
                  f"|dp| = {mags.dp_scale:.3e} rad (band 1e-7 to 1e-4)", t0, 1.0)


def test_c10_determinism(tmp_path):
    t0 = time.perf_counter()
    mismatched = []
    names = sorted(p.name for p in CONFIGS.glob("*.json"))
    for name in names:
        outs = []
        for i, workers in enumerate((1, 1, 2)):
            out = tmp_path / f"{name}-{i}"
            assert cli.main(["run", str(CONFIGS / name), "--out", str(out), "--workers", str(workers)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
        if not outs[0] == outs[1] == outs[2]:
            mismatched.append(name)
    assert report(10, "byte-identical CSV across reruns and worker counts", not mismatched,
                  f"{len(names)} configs, mismatches: {mismatched or 'none'}", t0, 5.0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
