"""Classical centre-of-mass paths above the plate.

A path is a piecewise polynomial z(t) (degree <= 3 per segment, coefficients
in the segment-local time s = t - t_start) plus a uniform drift parallel to
the plate, x(t) = x0 + v_par * t.  Paths are total functions on their domain,
which must extend past the interaction window by the light round-trip delay.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import C_LIGHT, Atom, ExternalPotential

DEFAULT_Z_MIN = 5e-9
DEFAULT_V_MAX = 1e-2 * C_LIGHT
ACCEL_RATIO_MAX = 1e-3
CONTINUITY_RTOL = 1e-12


class TrajectoryError(ValueError):
    """Malformed path, or evaluation outside its domain."""


class ClearanceError(TrajectoryError):
    pass


class VelocityBoundError(TrajectoryError):
    pass


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        if not 1 <= len(c) <= 4:
            raise TrajectoryError("segment polynomials must have 1 to 4 coefficients")
        object.__setattr__(self, "coeffs", c + (0.0,) * (4 - len(c)))
        if not self.t_end > self.t_start:
            raise TrajectoryError(f"empty segment [{self.t_start}, {self.t_end}]")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def value(self, s: float) -> float:
        c0, c1, c2, c3 = self.coeffs
        return c0 + s * (c1 + s * (c2 + s * c3))

    def slope(self, s: float) -> float:
        _, c1, c2, c3 = self.coeffs
        return c1 + s * (2.0 * c2 + s * 3.0 * c3)


class State(NamedTuple):
    x: np.ndarray | float
    z: np.ndarray | float
    vx: np.ndarray | float
    vz: np.ndarray | float
    az: np.ndarray | float


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-cubic vertical motion plus uniform parallel drift."""

    segments: tuple[Segment, ...]
    parallel_velocity: float = 0.0
    parallel_origin: float = 0.0
    label: str = ""
    interp_error_bound: float = 0.0
    _starts: tuple[float, ...] = field(init=False, repr=False, compare=False)
    _coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise TrajectoryError("a trajectory needs at least one segment")
        object.__setattr__(self, "segments", segs)
        for left, right in zip(segs, segs[1:]):
            if left.t_end != right.t_start:
                raise TrajectoryError(
                    f"segments not contiguous at t={left.t_end!r} / {right.t_start!r}")
        object.__setattr__(self, "_starts", tuple(s.t_start for s in segs))
        object.__setattr__(self, "_coeffs", np.array([s.coeffs for s in segs]))
        self._check_continuity()

    def _check_continuity(self):
        segs = self.segments
        if len(segs) == 1:
            return
        zscale = float(np.max(np.abs(self._coeffs[:, 0])))
        h = np.array([seg.duration for seg in segs])
        C = np.abs(self._coeffs)
        vscale = max(float(np.max(C[:, 1] + 2.0 * C[:, 2] * h + 3.0 * C[:, 3] * h * h)), 1e-300)
        for left, right in zip(segs, segs[1:]):
            h = left.duration
            dz = abs(left.value(h) - right.coeffs[0])
            dv = abs(left.slope(h) - right.coeffs[1])
            if dz > CONTINUITY_RTOL * zscale or dv > CONTINUITY_RTOL * vscale:
                raise TrajectoryError(
                    f"z or dz/dt discontinuous at t={right.t_start!r} "
                    f"(|dz|={dz:.3g} m, |dv|={dv:.3g} m/s)")

    @property
    def t_min(self) -> float:
        return self.segments[0].t_start

    @property
    def t_max(self) -> float:
        return self.segments[-1].t_end

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self._starts[1:]

    # evaluation ------------------------------------------------------------

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t < self.t_min) | (t > self.t_max)) or np.any(np.isnan(t)):
            raise TrajectoryError(
                f"time outside trajectory domain [{self.t_min:.6g}, {self.t_max:.6g}]")
        idx = np.searchsorted(self._starts, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.segments) - 1)
        s = t - np.asarray(self._starts)[idx]
        return idx, s

    def evaluate(self, t) -> State:
        """Position, velocity and vertical acceleration at time(s) t."""
        idx, s = self._locate(t)
        c = self._coeffs[idx].T
        z = c[0] + s * (c[1] + s * (c[2] + s * c[3]))
        vz = c[1] + s * (2.0 * c[2] + s * 3.0 * c[3])
        az = 2.0 * c[2] + 6.0 * c[3] * s
        x = self.parallel_origin + self.parallel_velocity * np.asarray(t, dtype=float)
        vx = np.full_like(z, self.parallel_velocity)
        if np.ndim(t) == 0:
            return State(float(x), float(z), float(vx), float(vz), float(az))
        return State(x, z, vx, vz, az)

    def z(self, t):
        return self.evaluate(t).z

    def vz(self, t):
        return self.evaluate(t).vz

    def _segment_at(self, t: float) -> Segment:
        if not self.t_min <= t <= self.t_max:
            raise TrajectoryError(
                f"time {t!r} outside trajectory domain [{self.t_min:.6g}, {self.t_max:.6g}]")
        i = bisect.bisect_right(self._starts, t) - 1
        return self.segments[max(i, 0)]

    def z_at(self, t: float) -> float:
        seg = self._segment_at(t)
        return seg.value(t - seg.t_start)

    def x_at(self, t: float) -> float:
        return self.parallel_origin + self.parallel_velocity * t

    def increment(self, t: float, dt: float) -> float:
        """z(t + dt) - z(t), without cancellation when both lie in one segment."""
        seg = self._segment_at(t)
        if t + dt > seg.t_end or t + dt < seg.t_start:
            return self.z_at(t + dt) - self.z_at(t)
        s = t - seg.t_start
        _, c1, c2, c3 = seg.coeffs
        return dt * (c1 + c2 * (2.0 * s + dt) + c3 * (3.0 * s * s + 3.0 * s * dt + dt * dt))

    # analytic extrema --------------------------------------------------------

    def _windowed(self, a, b):
        a = self.t_min if a is None else a
        b = self.t_max if b is None else b
        starts = np.asarray(self._starts)
        ends = starts + np.array([seg.duration for seg in self.segments])
        keep = (np.minimum(b, ends) >= np.maximum(a, starts))
        s0 = np.maximum(a, starts)[keep] - starts[keep]
        s1 = np.minimum(b, ends)[keep] - starts[keep]
        return self._coeffs[keep], s0, s1

    def range_of(self, coeffs_of, a=None, b=None) -> tuple[float, float]:
        """Exact (min, max) over [a, b] of a per-segment cubic.

        ``coeffs_of`` maps the (n, 4) coefficient array of z to the (n, 4)
        coefficients of the cubic to bound (z itself, or its derivative).
        """
        C, s0, s1 = self._windowed(a, b)
        lo, hi = _cubic_ranges(coeffs_of(C), s0, s1)
        return float(lo.min()), float(hi.max())

    def z_range(self, a=None, b=None) -> tuple[float, float]:
        return self.range_of(lambda C: C, a, b)

    def max_abs_vz(self, a=None, b=None) -> float:
        lo, hi = self.range_of(_derivative, a, b)
        return max(abs(lo), abs(hi))

    def max_abs_az(self, a=None, b=None) -> float:
        lo, hi = self.range_of(lambda C: _derivative(_derivative(C)), a, b)
        return max(abs(lo), abs(hi))

    def max_accel_height(self, a=None, b=None) -> float:
        """Upper bound on |z''(t)| z(t): per segment, max |z''| times max z."""
        C, s0, s1 = self._windowed(a, b)
        az0 = np.abs(2.0 * C[:, 2] + 6.0 * C[:, 3] * s0)
        az1 = np.abs(2.0 * C[:, 2] + 6.0 * C[:, 3] * s1)
        _, zmax = _cubic_ranges(C, s0, s1)
        return float(np.max(np.maximum(az0, az1) * zmax))

    # transformations ---------------------------------------------------------

    def time_dilated(self, factor: float) -> "Trajectory":
        """The path t -> r(factor * t), on the correspondingly shrunk domain."""
        if not factor > 0:
            raise ValueError("time-dilation factor must be > 0")
        segs = tuple(
            Segment(s.t_start / factor, s.t_end / factor,
                    tuple(c * factor**i for i, c in enumerate(s.coeffs)))
            for s in self.segments)
        return Trajectory(segs, self.parallel_velocity * factor, self.parallel_origin,
                          self.label, self.interp_error_bound)

    def with_drift(self, parallel_velocity: float,
                   parallel_origin: float | None = None) -> "Trajectory":
        return Trajectory(self.segments, parallel_velocity,
                          self.parallel_origin if parallel_origin is None else parallel_origin,
                          self.label, self.interp_error_bound)


def _cubic_ranges(C, s0, s1):
    """Per-row (min, max) of c0 + c1 s + c2 s^2 + c3 s^3 over [s0, s1]."""
    if len(C) == 0:
        raise TrajectoryError("window does not intersect the trajectory domain")
    d0, d1, d2 = C[:, 1], 2.0 * C[:, 2], 3.0 * C[:, 3]
    cand = [s0, s1]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        disc = d1 * d1 - 4.0 * d2 * d0
        q = -0.5 * (d1 + np.copysign(np.sqrt(np.where(disc >= 0, disc, np.nan)), d1))
        quad = d2 != 0
        cand.append(np.where(quad, q / d2, -d0 / d1))
        cand.append(np.where(quad, d0 / q, np.nan))
    vals = []
    for s in cand:
        ok = np.isfinite(s) & (s >= s0) & (s <= s1)
        s = np.where(ok, s, s0)
        vals.append(C[:, 0] + s * (C[:, 1] + s * (C[:, 2] + s * C[:, 3])))
    vals = np.stack(vals)
    return vals.min(axis=0), vals.max(axis=0)


def _derivative(C):
    D = np.zeros_like(C)
    D[:, 0], D[:, 1], D[:, 2] = C[:, 1], 2.0 * C[:, 2], 3.0 * C[:, 3]
    return D


class CheckResult(NamedTuple):
    ok: bool
    value: float
    limit: float


@dataclass(frozen=True)
class ScenarioWindow:
    """Interaction window [0, T]; paths must be defined up to T + delay_margin."""

    T: float
    delay_margin: float = 1e-12

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"window length T must be > 0, got {self.T!r}")
        if not self.delay_margin >= 0:
            raise ValueError("delay_margin must be >= 0")

    @property
    def t_start(self) -> float:
        return 0.0

    @property
    def t_end(self) -> float:
        return self.T

    @property
    def domain_end(self) -> float:
        return self.T + self.delay_margin

    def time_dilated(self, factor: float) -> "ScenarioWindow":
        return ScenarioWindow(self.T / factor, self.delay_margin / factor)


def support_end(traj: Trajectory, win: ScenarioWindow) -> float:
    """Latest time any delay bracket of the window can reach: T + 4 z_max / c."""
    _, z_max = traj.z_range(0.0, min(win.T, traj.t_max))
    return win.T + 4.0 * z_max / C_LIGHT


def check_window(traj: Trajectory, win: ScenarioWindow) -> CheckResult:
    """Domain must cover [0, T + 4 z_max / c] so every delay bracket fits."""
    need = support_end(traj, win)
    ok = traj.t_min <= 0.0 and traj.t_max >= need
    return CheckResult(ok, traj.t_max, need)


# checks --------------------------------------------------------------------
# (a, b) restricts a check to part of the domain; None means the whole domain.


def check_clearance(traj: Trajectory, z_min: float = DEFAULT_Z_MIN,
                    a: float | None = None, b: float | None = None) -> CheckResult:
    lo, _ = traj.z_range(a, b)
    return CheckResult(lo >= z_min, lo, z_min)


def check_velocity(traj: Trajectory, v_max: float = DEFAULT_V_MAX,
                   a: float | None = None, b: float | None = None) -> CheckResult:
    v = max(traj.max_abs_vz(a, b), abs(traj.parallel_velocity))
    return CheckResult(v <= v_max, v, v_max)


def check_acceleration_bound(traj: Trajectory, threshold: float = ACCEL_RATIO_MAX,
                             a: float | None = None, b: float | None = None) -> CheckResult:
    """Worst |z''(t)| z(t) / c^2, bounded per segment by max|z''| * max z."""
    ratio = traj.max_accel_height(a, b) / C_LIGHT**2
    return CheckResult(ratio <= threshold, ratio, threshold)


def validate_eom(traj: Trajectory, atom: Atom, pot: ExternalPotential,
                 samples_per_segment: int = 8, force_floor: float = 1e-40) -> float:
    """Largest relative residual of m z'' = -dV_ext/dz along the path.

    Advisory only: phases are computed along whatever path is supplied.
    """
    worst = 0.0
    u = np.linspace(0.0, 1.0, samples_per_segment)
    for seg in traj.segments:
        t = seg.t_start + u * seg.duration
        st = traj.evaluate(t)
        inertial = atom.mass * st.az
        force = np.asarray(pot.force_z(st.z), dtype=float)
        denom = np.maximum(np.maximum(np.abs(inertial), np.abs(force)), force_floor)
        worst = max(worst, float(np.max(np.abs(inertial + force) / denom)))
    return worst


# primitives ----------------------------------------------------------------


def _finish(traj: Trajectory, check: bool, z_min: float, v_max: float) -> Trajectory:
    if check:
        c = check_clearance(traj, z_min)
        if not c.ok:
            raise ClearanceError(
                f"path {traj.label!r} comes within {c.value:.4g} m of the plate "
                f"(z_min = {z_min:.4g} m)")
        v = check_velocity(traj, v_max)
        if not v.ok:
            raise VelocityBoundError(
                f"path {traj.label!r} reaches speed {v.value:.4g} m/s > v_max = {v_max:.4g} m/s")
    return traj


def _common(kw):
    return dict(parallel_velocity=float(kw.get("parallel_velocity", 0.0)),
                parallel_origin=float(kw.get("parallel_origin", 0.0)),
                label=str(kw.get("label", "")))


def _guard(kw):
    return (bool(kw.get("check", True)), float(kw.get("z_min", DEFAULT_Z_MIN)),
            float(kw.get("v_max", DEFAULT_V_MAX)))


def static(z0: float, t_end: float, **kw) -> Trajectory:
    traj = Trajectory((Segment(0.0, t_end, (z0,)),), **_common(kw))
    return _finish(traj, *_guard(kw))


def linear(z0: float, v: float, t_end: float, **kw) -> Trajectory:
    traj = Trajectory((Segment(0.0, t_end, (z0, v)),), **_common(kw))
    return _finish(traj, *_guard(kw))


def ballistic(z0: float, v0: float, t_end: float, g: float = 9.81, **kw) -> Trajectory:
    """z0 + v0 t - g t^2 / 2 (g > 0 pulls toward the plate)."""
    traj = Trajectory((Segment(0.0, t_end, (z0, v0, -0.5 * g)),), **_common(kw))
    return _finish(traj, *_guard(kw))


def sinusoidal(z0: float, amplitude: float, omega: float, t_end: float,
               phase: float = 0.0, interp_tol: float = 1e-9,
               min_nodes_per_period: int = 40, **kw) -> Trajectory:
    """z0 + A sin(omega t + phase) as a C1 piecewise-cubic Hermite interpolant.

    The node spacing h is chosen so that the Hermite remainder bound
    A omega^4 h^4 / 384 stays below ``interp_tol * (z0 - |A|)``, with at least
    ``min_nodes_per_period`` nodes per period.  The bound actually achieved is
    stored on the result as ``interp_error_bound``.
    """
    if not omega > 0:
        raise ValueError("omega must be > 0")
    A = float(amplitude)
    floor_z = max(z0 - abs(A), 1e-300)
    if A == 0.0:
        return static(z0, t_end, **kw)
    h = (384.0 * interp_tol * floor_z / (abs(A) * omega**4)) ** 0.25
    h = min(h, 2.0 * math.pi / (omega * min_nodes_per_period))
    n = max(1, math.ceil(t_end / h))
    t = np.linspace(0.0, t_end, n + 1)
    t[-1] = t_end
    f = z0 + A * np.sin(omega * t + phase)
    d = A * omega * np.cos(omega * t + phase)
    segs = []
    for i in range(n):
        hi = t[i + 1] - t[i]
        slope = (f[i + 1] - f[i]) / hi
        c2 = (3.0 * slope - 2.0 * d[i] - d[i + 1]) / hi
        c3 = (d[i] + d[i + 1] - 2.0 * slope) / hi**2
        segs.append(Segment(float(t[i]), float(t[i + 1]), (f[i], d[i], c2, c3)))
    hmax = float(np.max(np.diff(t)))
    bound = abs(A) * omega**4 * hmax**4 / 384.0
    traj = Trajectory(tuple(segs), interp_error_bound=bound, **_common(kw))
    return _finish(traj, *_guard(kw))


def piecewise(segments: Sequence[dict | Segment], **kw) -> Trajectory:
    """Build from explicit segments ({t_start, t_end, coeffs} in local time)."""
    segs = tuple(s if isinstance(s, Segment) else
                 Segment(float(s["t_start"]), float(s["t_end"]), tuple(s["coeffs"]))
                 for s in segments)
    traj = Trajectory(segs, **_common(kw))
    return _finish(traj, *_guard(kw))


_PRIMITIVES = {
    "static": static,
    "linear": linear,
    "ballistic": ballistic,
    "sinusoidal": sinusoidal,
    "piecewise": piecewise,
}


def make_primitive(kind: str, **params) -> Trajectory:
    """Construct a path by name: static, linear, ballistic, sinusoidal or piecewise."""
    try:
        builder = _PRIMITIVES[kind]
    except KeyError:
        raise TrajectoryError(
            f"unknown trajectory kind {kind!r}; expected one of {sorted(_PRIMITIVES)}") from None
    return builder(**params)
