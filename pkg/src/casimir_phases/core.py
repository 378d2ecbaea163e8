"""Physical constants, the atom model and external potentials.

Polarizability is carried as the volume alpha(0)/(4 pi eps0) in m^3, so the
near-field van der Waals coefficient reduces to

    C3 = hbar * omega0 * alpha_volume / 8,      V(z) = -C3 / z^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import constants as _sc


class DomainError(ValueError):
    """Argument outside the domain where a physical formula is defined."""


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = _sc.c
    hbar: float = _sc.hbar
    eps0: float = _sc.epsilon_0

    def __post_init__(self):
        if not (self.c > 0 and self.hbar > 0 and self.eps0 > 0):
            raise ValueError("physical constants must be strictly positive")


CONSTANTS = PhysicalConstants()
C_LIGHT = CONSTANTS.c
HBAR = CONSTANTS.hbar
EPS0 = CONSTANTS.eps0


@dataclass(frozen=True)
class Atom:
    """Two-level-like atom with a single dominant dipole transition.

    Attributes:
        omega0: transition angular frequency (rad/s).
        alpha0_over_4pieps0: static polarizability volume alpha(0)/(4 pi eps0) (m^3).
        mass: atomic mass (kg).
        internal_energy: constant internal energy E0 (J).
    """

    omega0: float
    alpha0_over_4pieps0: float
    mass: float
    internal_energy: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0!r}")
        if not self.alpha0_over_4pieps0 > 0:
            raise ValueError(
                f"alpha0_over_4pieps0 must be > 0, got {self.alpha0_over_4pieps0!r}")
        if not self.mass > 0:
            raise ValueError(f"mass must be > 0, got {self.mass!r}")

    @property
    def alpha0(self) -> float:
        """SI static polarizability alpha(0) in C m^2 / V."""
        return 4.0 * math.pi * EPS0 * self.alpha0_over_4pieps0

    @property
    def c3(self) -> float:
        """van der Waals coefficient C3 in J m^3."""
        return HBAR * self.omega0 * self.alpha0_over_4pieps0 / 8.0

    @property
    def c3_over_hbar(self) -> float:
        """C3/hbar in m^3/s; the natural prefactor of every vdW phase."""
        return self.omega0 * self.alpha0_over_4pieps0 / 8.0

    @property
    def dipole_correlation(self) -> "DipoleCorrelation":
        return DipoleCorrelation(self)


def sodium_like(mass: float = 3.8175458e-26) -> Atom:
    """Sodium D-line parameters (omega0 = 3.20e15 rad/s, 24.1 A^3)."""
    return Atom(omega0=3.20e15, alpha0_over_4pieps0=24.1e-30, mass=mass)


@dataclass(frozen=True)
class DipoleCorrelation:
    """Symmetrized harmonic-oscillator dipole correlator.

    K(s) = omega0 * alpha(0) * cos(omega0 * s), with alpha(0) in SI units.
    """

    atom: Atom

    def __call__(self, s):
        a = self.atom
        return a.omega0 * a.alpha0 * np.cos(a.omega0 * np.asarray(s, dtype=float))


def _check_distance(z):
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError("plate distance must be strictly positive")
    return z


def _maybe_scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def vdw_potential(atom: Atom, z):
    """Near-field van der Waals energy -C3/z^3 (J) above a perfect conductor."""
    z = _check_distance(z)
    return _maybe_scalar(-atom.c3 / z**3)


def vdw_gradient(atom: Atom, z):
    """dV/dz = 3 C3 / z^4 (J/m). Positive: the force points toward the plate."""
    z = _check_distance(z)
    return _maybe_scalar(3.0 * atom.c3 / z**4)


def short_distance_ratio(atom: Atom, z_max: float) -> float:
    """Dimensionless omega0 * (2 z_max) / c; the model needs this to be small."""
    return atom.omega0 * 2.0 * z_max / C_LIGHT


PotentialKind = Literal["none", "linear", "harmonic"]


def _vec3(v) -> tuple[float, float, float]:
    t = tuple(float(x) for x in v)
    if len(t) != 3:
        raise ValueError(f"expected a 3-vector, got {v!r}")
    return t


@dataclass(frozen=True)
class ExternalPotential:
    """External potential that is at most quadratic in position.

    ``linear``: V = gradient . r.  ``harmonic``: V = 1/2 sum_i k_i (r_i - c_i)^2.
    Positions are (x, y, z) with the plate in the z = 0 plane.
    """

    kind: PotentialKind = "none"
    gradient: tuple[float, float, float] = (0.0, 0.0, 0.0)
    stiffness: tuple[float, float, float] = (0.0, 0.0, 0.0)
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("none", "linear", "harmonic"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        object.__setattr__(self, "gradient", _vec3(self.gradient))
        object.__setattr__(self, "stiffness", _vec3(self.stiffness))
        object.__setattr__(self, "center", _vec3(self.center))
        if any(k < 0 for k in self.stiffness):
            raise ValueError("harmonic stiffness entries must be >= 0")

    @classmethod
    def none(cls) -> "ExternalPotential":
        return cls("none")

    @classmethod
    def linear(cls, gradient) -> "ExternalPotential":
        return cls("linear", gradient=gradient)

    @classmethod
    def gravity(cls, mass: float, g: float = 9.81) -> "ExternalPotential":
        """Uniform gravity pulling toward the plate: V = m g z."""
        return cls("linear", gradient=(0.0, 0.0, mass * g))

    @classmethod
    def harmonic(cls, stiffness, center=(0.0, 0.0, 0.0)) -> "ExternalPotential":
        return cls("harmonic", stiffness=stiffness, center=center)

    def value(self, r):
        """Potential energy (J) at r; r has trailing dimension 3."""
        r = np.asarray(r, dtype=float)
        if self.kind == "none":
            out = np.zeros(r.shape[:-1])
        elif self.kind == "linear":
            out = r @ np.asarray(self.gradient)
        else:
            d = r - np.asarray(self.center)
            out = 0.5 * (d**2) @ np.asarray(self.stiffness)
        return _maybe_scalar(out)

    def force_z(self, z):
        """dV/dz (J/m) at height z."""
        z = np.asarray(z, dtype=float)
        if self.kind == "none":
            out = np.zeros_like(z)
        elif self.kind == "linear":
            out = np.full_like(z, self.gradient[2])
        else:
            out = self.stiffness[2] * (z - self.center[2])
        return _maybe_scalar(out)


def external_potential_value(pot: ExternalPotential, r) -> float:
    return pot.value(r)
