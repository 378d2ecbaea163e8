"""Multi-arm interferometers: coherence matrix, additivity and DP extraction."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .core import C_LIGHT, Atom, ExternalPotential, short_distance_ratio
from .numerics import EPS, ConvergenceError, QuadratureConfig, RootConfig, RootError
from .phases import (METHODS, DoublePathPhase, Method, PhaseBreakdown, phi_dp,
                     phi_external, phi_sp)
from .trajectory import (ACCEL_RATIO_MAX, DEFAULT_V_MAX, DEFAULT_Z_MIN, ScenarioWindow,
                         Trajectory, TrajectoryError, check_acceleration_bound,
                         check_clearance, check_velocity, check_window, support_end,
                         validate_eom)

SHORT_DISTANCE_MAX = 1e-2


class ScenarioError(ValueError):
    """Scenario fails a hard precondition."""


class PhaseComputationError(RuntimeError):
    """Numerical failure while computing the phase of an arm or a pair."""

    def __init__(self, message: str, context: str):
        super().__init__(f"{context}: {message}")
        self.context = context


@dataclass(frozen=True)
class Limits:
    z_min: float = DEFAULT_Z_MIN
    v_max: float = DEFAULT_V_MAX
    accel_ratio_max: float = ACCEL_RATIO_MAX
    short_distance_max: float = SHORT_DISTANCE_MAX
    eom_tol: float | None = None


class Check(NamedTuple):
    name: str
    arm: str
    ok: bool
    value: float
    limit: float

    def describe(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status}  {self.name:<15} arm={self.arm:<8} value={self.value:.6g} limit={self.limit:.6g}"


# Checks that make the numerics ill-defined when they fail.
HARD_CHECKS = ("clearance", "velocity", "acceleration", "domain")


@dataclass(frozen=True)
class Scenario:
    atom: Atom
    trajectories: tuple[Trajectory, ...]
    window: ScenarioWindow
    potential: ExternalPotential = field(default_factory=ExternalPotential.none)
    quad: QuadratureConfig = QuadratureConfig()
    root: RootConfig = RootConfig()
    dp_method: Method = "first_order"
    limits: Limits = Limits()

    def __post_init__(self):
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        if len(self.trajectories) < 2:
            raise ScenarioError("a scenario needs at least two arms")
        if self.dp_method not in METHODS:
            raise ScenarioError(f"dp_method must be one of {METHODS}, got {self.dp_method!r}")

    @property
    def n_arms(self) -> int:
        return len(self.trajectories)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label or str(i + 1) for i, t in enumerate(self.trajectories))

    def support_end(self) -> float:
        """End of the interval the phases actually sample, T + 4 z_max / c."""
        return max(support_end(t, self.window) for t in self.trajectories)

    def z_max(self) -> float:
        """Largest height over the sampled interval."""
        end = self.support_end()
        return max(t.z_range(0.0, min(end, t.t_max))[1] for t in self.trajectories)

    def checks(self) -> list[Check]:
        lim = self.limits
        end = self.support_end()
        out = []
        for label, traj in zip(self.labels, self.trajectories):
            b = min(end, traj.t_max)
            c = check_clearance(traj, lim.z_min, 0.0, b)
            out.append(Check("clearance", label, c.ok, c.value, c.limit))
            c = check_velocity(traj, lim.v_max, 0.0, b)
            out.append(Check("velocity", label, c.ok, c.value, c.limit))
            c = check_acceleration_bound(traj, lim.accel_ratio_max, 0.0, b)
            out.append(Check("acceleration", label, c.ok, c.value, c.limit))
            # pair delays reach up to the scenario-wide support end
            ok = check_window(traj, self.window).ok and traj.t_max >= end
            out.append(Check("domain", label, ok, traj.t_max, end))
            if lim.eom_tol is not None:
                r = validate_eom(traj, self.atom, self.potential)
                out.append(Check("eom", label, r <= lim.eom_tol, r, lim.eom_tol))
        ratio = short_distance_ratio(self.atom, self.z_max())
        out.append(Check("short_distance", "all", ratio <= lim.short_distance_max,
                         ratio, lim.short_distance_max))
        return out

    def require_valid(self, names: Sequence[str] = HARD_CHECKS) -> None:
        failed = [c for c in self.checks() if c.name in names and not c.ok]
        if failed:
            raise ScenarioError("; ".join(c.describe() for c in failed))

    def time_dilated(self, factor: float) -> "Scenario":
        """Every path t -> r(factor t), window T -> T / factor."""
        return replace(self,
                       trajectories=tuple(t.time_dilated(factor) for t in self.trajectories),
                       window=self.window.time_dilated(factor))


@dataclass(frozen=True)
class CoherenceMatrix:
    """Pairwise phase coherences phi_jk and their single/double-path parts."""

    labels: tuple[str, ...]
    phi0: np.ndarray
    single_path: tuple[PhaseBreakdown, ...]
    dp: np.ndarray
    method: Method
    rel_tol: float = QuadratureConfig().rel_tol
    abs_tol: float = QuadratureConfig().abs_tol
    # Packet overlaps and decoherence envelopes are not modelled: the matrix
    # stores phases only, and the imaginary part of the influence phase is 1.
    decoherence: str = "not modeled"

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def phi_sp(self) -> np.ndarray:
        return np.array([b.phi_sp for b in self.single_path])

    @property
    def phi_vdw(self) -> np.ndarray:
        return np.array([b.phi_vdw for b in self.single_path])

    @property
    def sp_dynamical(self) -> np.ndarray:
        return np.array([b.sp_dynamical for b in self.single_path])

    def standard(self) -> np.ndarray:
        """Coherences from single-path phases only (DP excluded)."""
        p0, sp = self.phi0, self.phi_sp
        return (p0[:, None] - p0[None, :]) + (sp[:, None] - sp[None, :])

    def phases(self) -> np.ndarray:
        return self.standard() + self.dp

    def scale(self) -> float:
        """Largest single-path phase magnitude; sets the round-off floor."""
        return float(np.max(np.abs(np.concatenate([self.phi0, self.phi_sp]))))


def _sp_task(args):
    atom, traj, pot, win, method, quad, root, label = args
    try:
        b = phi_sp(atom, traj, win, method, quad, root)
        return replace(b, phi0=phi_external(atom, traj, pot, win, quad))
    except (ConvergenceError, RootError, TrajectoryError, FloatingPointError) as exc:
        raise PhaseComputationError(str(exc), f"arm {label}") from exc


def _dp_task(args):
    atom, tj, tk, win, method, quad, root, pair, context = args
    try:
        return phi_dp(atom, tj, tk, win, method, quad, root, pair)
    except (ConvergenceError, RootError, TrajectoryError, FloatingPointError) as exc:
        raise PhaseComputationError(str(exc), context) from exc


def _run(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def coherence_matrix(sc: Scenario, workers: int = 1) -> CoherenceMatrix:
    """All phi0, single-path and pairwise double-path phases of a scenario.

    ``dp_method`` is used for both single- and double-path terms so that mixing
    methods cannot masquerade as non-additivity.  Results do not depend on
    ``workers``.
    """
    sc.require_valid()
    labels = sc.labels
    m = sc.dp_method
    sp_tasks = [(sc.atom, t, sc.potential, sc.window, m, sc.quad, sc.root, lab)
                for t, lab in zip(sc.trajectories, labels)]
    pairs = list(itertools.combinations(range(sc.n_arms), 2))
    dp_tasks = [(sc.atom, sc.trajectories[j], sc.trajectories[k], sc.window, m,
                 sc.quad, sc.root, (j, k), f"pair ({labels[j]}, {labels[k]})")
                for j, k in pairs]
    single = _run(_sp_task, sp_tasks, workers)
    dps: list[DoublePathPhase] = _run(_dp_task, dp_tasks, workers)

    n = sc.n_arms
    dp = np.zeros((n, n))
    for (j, k), d in zip(pairs, dps):
        dp[j, k] = d.value
        dp[k, j] = -d.value
    phi0 = np.array([b.phi0 for b in single])
    return CoherenceMatrix(labels, phi0, tuple(single), dp, m,
                           sc.quad.rel_tol, sc.quad.abs_tol)


class TripleResidual(NamedTuple):
    j: int
    l: int
    k: int
    residual: float
    standard_residual: float
    dp_combination: float


class Extraction(NamedTuple):
    estimate: float
    true_dp12: float
    relative_error: float
    defined: bool


@dataclass(frozen=True)
class AdditivityReport:
    triples: tuple[TripleResidual, ...]
    standard_tolerance: float
    bookkeeping_tolerance: float
    extraction: Extraction | None

    @property
    def max_standard_residual(self) -> float:
        return max((abs(t.standard_residual) for t in self.triples), default=0.0)

    @property
    def max_bookkeeping_error(self) -> float:
        return max((abs(t.residual - t.dp_combination) for t in self.triples), default=0.0)

    @property
    def standard_additive(self) -> bool:
        return self.max_standard_residual <= self.standard_tolerance

    @property
    def bookkeeping_ok(self) -> bool:
        return self.max_bookkeeping_error <= self.bookkeeping_tolerance


def additivity_report(m: CoherenceMatrix) -> AdditivityReport:
    """Residuals phi_jk - (phi_jl + phi_lk) over all ordered triples of distinct arms.

    Single-path contributions telescope, so the full residual equals
    dp_jk - dp_jl - dp_lk up to round-off in the single-path phases.
    """
    if m.n < 3:
        raise ValueError("additivity needs at least three arms")
    full, std, dp = m.phases(), m.standard(), m.dp
    triples = []
    for j, l, k in itertools.permutations(range(m.n), 3):
        triples.append(TripleResidual(
            j, l, k,
            full[j, k] - (full[j, l] + full[l, k]),
            std[j, k] - (std[j, l] + std[l, k]),
            dp[j, k] - dp[j, l] - dp[l, k]))
    scale = m.scale()
    std_tol = 10.0 * max(m.rel_tol * scale, m.abs_tol)
    book_tol = 16.0 * EPS * max(scale, float(np.max(np.abs(dp))))
    extraction = extract_dp12(m) if m.n == 3 else None
    return AdditivityReport(tuple(triples), std_tol, book_tol, extraction)


def extract_dp12(m: CoherenceMatrix, arms: tuple[int, int, int] = (0, 1, 2)) -> Extraction:
    """Estimate dp_12 as phi_12 - (phi_13 + phi_32).

    All single-path phases cancel; what is left is dp_12 + dp_13 + dp_32, so
    the error is small when arm 3 is far from the plate.  ``relative_error``
    is NaN (and ``defined`` False) when |dp_12| is below the quadrature
    absolute tolerance.
    """
    a, b, c = arms
    phi = m.phases()
    estimate = phi[a, b] - (phi[a, c] + phi[c, b])
    true = m.dp[a, b]
    if abs(true) <= m.abs_tol:
        return Extraction(float(estimate), float(true), float("nan"), False)
    return Extraction(float(estimate), float(true), abs(estimate - true) / abs(true), True)


@dataclass(frozen=True)
class MagnitudeReport:
    vdw_scale: float
    sp_dynamical_scale: float
    dp_scale: float
    beta: float

    @property
    def sp_ratio(self) -> float:
        return self.sp_dynamical_scale / self.vdw_scale

    @property
    def dp_ratio(self) -> float:
        return self.dp_scale / self.vdw_scale

    @property
    def sp_ratio_over_beta(self) -> float:
        return self.sp_ratio / self.beta if self.beta > 0 else 0.0

    @property
    def dp_ratio_over_beta(self) -> float:
        return self.dp_ratio / self.beta if self.beta > 0 else 0.0


def magnitude_report(sc: Scenario, m: CoherenceMatrix | None = None) -> MagnitudeReport:
    """Largest |phi_vdw|, |sp_dynamical|, |dp| of a scenario, with beta = max|zdot|/c."""
    if m is None:
        m = coherence_matrix(sc)
    beta = max(t.max_abs_vz(0.0, sc.window.T) for t in sc.trajectories) / C_LIGHT
    return MagnitudeReport(
        float(np.max(np.abs(m.phi_vdw))),
        float(np.max(np.abs(m.sp_dynamical))),
        float(np.max(np.abs(m.dp))),
        beta)
