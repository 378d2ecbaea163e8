"""Phases accumulated by atomic paths near a perfectly conducting plate.

Notation: C3/hbar = omega0 * alpha_volume / 8 (see :mod:`casimir_phases.core`).

* quasi-static vdW phase:   phi_vdw = (C3/hbar) int dt / z^3
* single-path phase:        phi_sp  = (C3/hbar) int dt' / zbar^3,
  zbar(t') = (z(t') + z(t' + tau)) / 2 with tau the self light-cone delay
* first-order expansion:    phi_sp ~ phi_vdw - (3 C3 / hbar c) int zdot / z^3 dt
* double-path phase:        phi_dp_jk = 3 (omega0/c) alpha_volume
                                        int (zdot_k - zdot_j) / (z_j + z_k)^3 dt

The retarded double-path oracle integrates 1/zbar_{k->j}^3 - 1/zbar_{j->k}^3
with exact pair delays; to first order in zdot/c it reduces to the closed form
above.  All dynamical terms are integrated as differences computed without
cancellation, so static paths give exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import C_LIGHT, HBAR, Atom, ExternalPotential, vdw_potential
from .numerics import QuadratureConfig, RootConfig, integrate
from .retardation import roundtrip_delay_pair, roundtrip_delay_self
from .trajectory import ScenarioWindow, Trajectory

Method = Literal["first_order", "retarded"]
METHODS = ("first_order", "retarded")


@dataclass(frozen=True)
class PhaseBreakdown:
    """Single-path phases of one arm, in radians.

    ``phi0`` is None when the external/free phase was not requested.
    """

    phi_vdw: float
    sp_dynamical: float
    method: Method
    phi0: float | None = None

    @property
    def phi_sp(self) -> float:
        return self.phi_vdw + self.sp_dynamical

    @property
    def total(self) -> float:
        return (self.phi0 or 0.0) + self.phi_sp


@dataclass(frozen=True)
class DoublePathPhase:
    value: float
    pair: tuple[int, int]
    method: Method


def _points(*trajs: Trajectory) -> list[float]:
    pts = set()
    for t in trajs:
        pts.update(t.breakpoints)
    return sorted(pts)


def _scalar_map(fn):
    def vectorized(ts):
        return np.fromiter((fn(float(t)) for t in ts), dtype=float, count=len(ts))
    return vectorized


def phi_external(atom: Atom, traj: Trajectory, pot: ExternalPotential,
                 win: ScenarioWindow, quad: QuadratureConfig = QuadratureConfig()) -> float:
    """Free-propagation and external-potential phase (1/hbar) int (KE - E0 - V_ext) dt."""

    def f(t):
        st = traj.evaluate(t)
        r = np.stack([st.x, np.zeros_like(st.z), st.z], axis=-1)
        kinetic = 0.5 * atom.mass * (st.vx**2 + st.vz**2)
        return (kinetic - atom.internal_energy - pot.value(r)) / HBAR

    return integrate(f, 0.0, win.T, quad, _points(traj)).value


def phi_vdw(atom: Atom, traj: Trajectory, win: ScenarioWindow,
            quad: QuadratureConfig = QuadratureConfig()) -> float:
    """Quasi-static phase -(1/hbar) int V_vdW(z(t)) dt, positive."""
    k = atom.c3_over_hbar
    return integrate(lambda t: k / traj.z(t) ** 3, 0.0, win.T, quad, _points(traj)).value


def sp_endpoint_correction(atom: Atom, traj: Trajectory, win: ScenarioWindow) -> float:
    """Closed form of the first-order single-path correction.

    int zdot / z^3 dt = -1/(2 z^2) evaluated between the endpoints, hence
    (3 C3 / 2 hbar c) (1/z(T)^2 - 1/z(0)^2).
    """
    z0, zT = traj.z_at(0.0), traj.z_at(win.T)
    return 1.5 * atom.c3_over_hbar / C_LIGHT * (1.0 / zT**2 - 1.0 / z0**2)


def phi_sp_first_order(atom: Atom, traj: Trajectory, win: ScenarioWindow,
                       quad: QuadratureConfig = QuadratureConfig()) -> PhaseBreakdown:
    k = 3.0 * atom.c3_over_hbar / C_LIGHT

    def f(t):
        st = traj.evaluate(t)
        return -k * st.vz / st.z**3

    corr = integrate(f, 0.0, win.T, quad, _points(traj)).value
    return PhaseBreakdown(phi_vdw(atom, traj, win, quad), corr, "first_order")


def _inv_cube_difference(a: float, b: float, b_minus_a: float) -> float:
    """1/a^3 - 1/b^3 given the difference b - a computed separately."""
    return b_minus_a * (a * a + a * b + b * b) / (a**3 * b**3)


def phi_sp_retarded(atom: Atom, traj: Trajectory, win: ScenarioWindow,
                    quad: QuadratureConfig = QuadratureConfig(),
                    root_cfg: RootConfig = RootConfig()) -> PhaseBreakdown:
    """Single-path phase with the retarded mean distance from the exact self delay."""
    k = atom.c3_over_hbar

    def dyn(t):
        sol = roundtrip_delay_self(traj, t, root_cfg)
        z = traj.z_at(t)
        half_inc = 0.5 * traj.increment(t, sol.tau)
        # 1/zbar^3 - 1/z^3 with zbar = z + half_inc
        return k * _inv_cube_difference(z + half_inc, z, -half_inc)

    pts = _points(traj)
    corr = integrate(_scalar_map(dyn), 0.0, win.T, quad, pts).value
    return PhaseBreakdown(phi_vdw(atom, traj, win, quad), corr, "retarded")


def coarse_grained_potential(atom: Atom, traj: Trajectory, t: float,
                             quad: QuadratureConfig = QuadratureConfig(),
                             root_cfg: RootConfig = RootConfig()) -> float:
    """vdW potential averaged over the light round-trip [t, t + tau] (J)."""
    tau = roundtrip_delay_self(traj, t, root_cfg).tau
    z_t = traj.z_at(t)
    # integrate (z_t / z)^3 over the unit interval to keep the integrand O(1)
    ratio = integrate(lambda u: (z_t / traj.z(t + u * tau)) ** 3, 0.0, 1.0, quad).value
    return vdw_potential(atom, z_t) * ratio


def phi_coarse_grained(atom: Atom, traj: Trajectory, win: ScenarioWindow,
                       quad: QuadratureConfig = QuadratureConfig(),
                       root_cfg: RootConfig = RootConfig()) -> float:
    """-(1/hbar) int Vbar(t) dt with the round-trip averaged potential."""
    f = _scalar_map(lambda t: -coarse_grained_potential(atom, traj, t, quad, root_cfg) / HBAR)
    return integrate(f, 0.0, win.T, quad, _points(traj)).value


def phi_dp_first_order(atom: Atom, traj_j: Trajectory, traj_k: Trajectory,
                       win: ScenarioWindow, quad: QuadratureConfig = QuadratureConfig(),
                       pair: tuple[int, int] = (0, 1)) -> DoublePathPhase:
    """Closed-form double-path phase; independent of any common parallel drift."""
    k = 3.0 * atom.omega0 / C_LIGHT * atom.alpha0_over_4pieps0

    def f(t):
        sj, sk = traj_j.evaluate(t), traj_k.evaluate(t)
        return k * (sk.vz - sj.vz) / (sj.z + sk.z) ** 3

    val = integrate(f, 0.0, win.T, quad, _points(traj_j, traj_k)).value
    return DoublePathPhase(val, pair, "first_order")


def phi_dp_retarded(atom: Atom, traj_j: Trajectory, traj_k: Trajectory,
                    win: ScenarioWindow, quad: QuadratureConfig = QuadratureConfig(),
                    root_cfg: RootConfig = RootConfig(),
                    pair: tuple[int, int] = (0, 1)) -> DoublePathPhase:
    """Difference of the k->j and j->k propagation integrals.

    zbar_{k->j}(t') = (z_k(t') + z_j(t' + tau_{k->j})) / 2, and symmetrically.
    """
    k = atom.c3_over_hbar

    def f(t):
        tau_kj = roundtrip_delay_pair(traj_k, traj_j, t, root_cfg).tau
        tau_jk = roundtrip_delay_pair(traj_j, traj_k, t, root_cfg).tau
        inc_j = traj_j.increment(t, tau_kj)
        inc_k = traj_k.increment(t, tau_jk)
        s = traj_j.z_at(t) + traj_k.z_at(t)
        a = 0.5 * (s + inc_j)
        b = 0.5 * (s + inc_k)
        return k * _inv_cube_difference(a, b, 0.5 * (inc_k - inc_j))

    val = integrate(_scalar_map(f), 0.0, win.T, quad, _points(traj_j, traj_k)).value
    return DoublePathPhase(val, pair, "retarded")


def phi_sp(atom: Atom, traj: Trajectory, win: ScenarioWindow, method: Method,
           quad: QuadratureConfig = QuadratureConfig(),
           root_cfg: RootConfig = RootConfig()) -> PhaseBreakdown:
    if method == "first_order":
        return phi_sp_first_order(atom, traj, win, quad)
    if method == "retarded":
        return phi_sp_retarded(atom, traj, win, quad, root_cfg)
    raise ValueError(f"unknown method {method!r}")


def phi_dp(atom: Atom, traj_j: Trajectory, traj_k: Trajectory, win: ScenarioWindow,
           method: Method, quad: QuadratureConfig = QuadratureConfig(),
           root_cfg: RootConfig = RootConfig(),
           pair: tuple[int, int] = (0, 1)) -> DoublePathPhase:
    if method == "first_order":
        return phi_dp_first_order(atom, traj_j, traj_k, win, quad, pair)
    if method == "retarded":
        return phi_dp_retarded(atom, traj_j, traj_k, win, quad, root_cfg, pair)
    raise ValueError(f"unknown method {method!r}")
