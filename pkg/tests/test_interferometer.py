from dataclasses import replace

import numpy as np
import pytest

from casimir_phases import (Limits, Scenario, ScenarioError, ScenarioWindow, additivity_report,
                            coherence_matrix, extract_dp12, magnitude_report, phi_dp_first_order,
                            phi_sp_first_order, phi_vdw, sodium_like)
from casimir_phases.core import C_LIGHT
from casimir_phases.interferometer import HARD_CHECKS, PhaseComputationError
from casimir_phases.trajectory import linear, sinusoidal, static

T = 1e-6
WIN = ScenarioWindow(T)
END = WIN.domain_end
LOOSE = Limits(short_distance_max=10.0)


def scenario(*trajs, **kw):
    kw.setdefault("limits", LOOSE)
    return Scenario(sodium_like(), trajs, WIN, **kw)


def three_arm(z3=400e-9, dv=0.01):
    return scenario(linear(30e-9, -dv, END, label="1"), linear(30e-9, dv, END, label="2"),
                    static(z3, END, label="3"))


def test_needs_two_arms():
    with pytest.raises(ScenarioError):
        scenario(static(20e-9, END))
    with pytest.raises(ScenarioError):
        scenario(static(20e-9, END), static(30e-9, END), dp_method="exact")


def test_two_equal_static_arms_all_zero():
    m = coherence_matrix(scenario(static(20e-9, END), static(20e-9, END)))
    assert np.all(m.phases() == 0.0)
    assert m.decoherence == "not modeled"


def test_three_static_arms():
    sc = scenario(static(20e-9, END), static(30e-9, END), static(40e-9, END))
    m = coherence_matrix(sc)
    vdw = [phi_vdw(sc.atom, t, WIN) for t in sc.trajectories]
    for j in range(3):
        for k in range(3):
            assert m.phases()[j, k] == pytest.approx(vdw[j] - vdw[k], rel=1e-12, abs=1e-12)
    assert np.all(m.dp == 0.0)
    rep = additivity_report(m)
    assert all(t.dp_combination == 0.0 for t in rep.triples)
    assert max(abs(t.residual) for t in rep.triples) <= rep.bookkeeping_tolerance
    assert rep.extraction.estimate == pytest.approx(0.0, abs=rep.standard_tolerance)
    assert not rep.extraction.defined and np.isnan(rep.extraction.relative_error)


def test_one_moving_arm_matches_direct_calls():
    sc = scenario(static(20e-9, END), static(30e-9, END), linear(40e-9, 0.01, END))
    m = coherence_matrix(sc)
    assert m.dp[0, 1] == 0.0
    for j in (0, 1):
        direct = phi_dp_first_order(sc.atom, sc.trajectories[j], sc.trajectories[2], WIN).value
        assert m.dp[j, 2] == direct != 0.0
        assert m.dp[2, j] == -direct
    sp = phi_sp_first_order(sc.atom, sc.trajectories[2], WIN)
    assert m.single_path[2].phi_sp == sp.phi_sp


def test_matrix_antisymmetric_zero_diagonal():
    m = coherence_matrix(three_arm())
    phi = m.phases()
    assert np.all(phi == -phi.T)
    assert np.all(np.diag(phi) == 0.0)


def test_additivity_bookkeeping_linear_arms():
    v = (-0.01, 0.02, 0.005)
    z = (25e-9, 30e-9, 60e-9)
    sc = scenario(*[linear(a, b, END) for a, b in zip(z, v)])
    m = coherence_matrix(sc)
    rep = additivity_report(m)
    assert rep.standard_additive and rep.bookkeeping_ok

    k = 3 * sc.atom.omega0 / C_LIGHT * sc.atom.alpha0_over_4pieps0

    def closed(j, l):
        s0, dv = z[j] + z[l], v[l] - v[j]
        sT = s0 + (v[j] + v[l]) * T
        return k * dv * (1 / s0**2 - 1 / sT**2) / (2 * (v[j] + v[l]))

    for t in rep.triples:
        combo = closed(t.j, t.k) - closed(t.j, t.l) - closed(t.l, t.k)
        assert t.residual == pytest.approx(combo, rel=1e-9)


def test_standard_additivity_triples_all_permutations():
    rep = additivity_report(coherence_matrix(three_arm()))
    assert len(rep.triples) == 6
    assert rep.max_standard_residual <= rep.standard_tolerance
    with pytest.raises(ValueError):
        additivity_report(coherence_matrix(scenario(static(20e-9, END), static(30e-9, END))))


def test_three_arm_extraction():
    m = coherence_matrix(three_arm())
    ext = extract_dp12(m)
    assert ext.defined
    assert 1e-4 < ext.relative_error < 5e-3
    assert ext.estimate - ext.true_dp12 == pytest.approx(-(m.dp[0, 2] + m.dp[2, 1]), rel=1e-6)
    doubled = extract_dp12(coherence_matrix(three_arm(800e-9)))
    assert ext.relative_error / doubled.relative_error == pytest.approx(8.0, rel=0.15)


def test_extraction_with_near_arm_fails():
    near = scenario(linear(30e-9, -0.01, END), linear(30e-9, 0.01, END), linear(30e-9, 0.01, END))
    ext = extract_dp12(coherence_matrix(near))
    assert ext.relative_error > 0.5


def test_global_phase_invariance():
    m = coherence_matrix(three_arm())
    shifted = replace(m, phi0=m.phi0 + 123.0)
    assert np.allclose(shifted.phases(), m.phases(), rtol=0, atol=1e-12)


def test_magnitude_report():
    base = magnitude_report(three_arm(dv=0.001))
    fast = magnitude_report(three_arm(dv=0.01))
    assert fast.dp_scale / base.dp_scale == pytest.approx(10.0, rel=1e-3)
    assert base.beta == pytest.approx(0.001 / C_LIGHT)
    still = magnitude_report(scenario(static(20e-9, END), static(30e-9, END)))
    assert still.dp_scale == 0.0 and still.sp_ratio_over_beta == 0.0


def test_hard_checks_enforced():
    bad = scenario(linear(20e-9, -0.02, END, check=False), static(30e-9, END))
    assert [c.name for c in bad.checks() if not c.ok] == ["clearance"]
    with pytest.raises(ScenarioError, match="clearance"):
        coherence_matrix(bad)


def test_short_distance_is_reported_not_enforced():
    sc = scenario(static(20e-9, END), static(30e-9, END), limits=Limits())
    failed = [c for c in sc.checks() if not c.ok]
    assert [c.name for c in failed] == ["short_distance"]
    assert "short_distance" not in HARD_CHECKS
    coherence_matrix(sc)


def test_domain_check_uses_support_window():
    win = ScenarioWindow(1e-13, 1e-16)
    sc = Scenario(sodium_like(), (static(20e-9, 1e-13 + 1e-16), static(30e-9, 1e-13 + 1e-16)), win,
                  limits=LOOSE)
    assert not [c for c in sc.checks() if c.name == "domain" and c.ok]
    win = ScenarioWindow(1e-13, 1e-15)
    sc = Scenario(sodium_like(), (static(20e-9, 1e-13 + 1e-15), static(30e-9, 1e-13 + 1e-15)), win,
                  limits=LOOSE)
    assert all(c.ok for c in sc.checks())


def test_eom_check_optional():
    sc = scenario(static(20e-9, END), linear(30e-9, 0.01, END), limits=replace(LOOSE, eom_tol=1e-6))
    eom = [c for c in sc.checks() if c.name == "eom"]
    assert len(eom) == 2 and all(c.ok for c in eom)


def test_workers_do_not_change_results():
    sc = scenario(sinusoidal(30e-9, 5e-9, 1e7, END), linear(25e-9, 0.01, END), static(300e-9, END))
    one = coherence_matrix(sc, workers=1)
    two = coherence_matrix(sc, workers=3)
    assert np.array_equal(one.phases(), two.phases())
    assert one.single_path == two.single_path


def test_numeric_failure_tagged(monkeypatch):
    from casimir_phases import interferometer
    from casimir_phases.numerics import ConvergenceError

    def boom(*args, **kw):
        raise ConvergenceError("forced", 0.0, 1.0)

    monkeypatch.setattr(interferometer, "phi_dp", boom)
    with pytest.raises(PhaseComputationError, match=r"pair \(1, 2\): forced"):
        coherence_matrix(three_arm())
