"""Adaptive quadrature and bracketed root finding.

Every integral over time in the package goes through :func:`integrate`, and
every light-cone delay through :func:`find_root`.  Both are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np
from scipy import optimize

EPS = np.finfo(float).eps

# 7-point Gauss / 15-point Kronrod pair on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod abscissae (1, 3, 5, 7 from each end).
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


class ConvergenceError(RuntimeError):
    """Adaptive quadrature hit its depth limit.

    ``value`` and ``error_estimate`` hold the best estimate reached.
    """

    def __init__(self, message, value=float("nan"), error_estimate=float("inf")):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class RootError(RuntimeError):
    """Invalid bracket or root finder did not converge."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-30
    max_depth: int = 40

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be > 0")
        if self.max_depth < 10:
            raise ValueError("max_depth must be >= 10")


@dataclass(frozen=True)
class RootConfig:
    rel_tol: float = 1e-14
    max_iter: int = 60

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("root rel_tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


class QuadResult(NamedTuple):
    value: float
    error_estimate: float


def _gk15(f, lo: np.ndarray, hi: np.ndarray):
    """Apply the GK15 rule to a batch of intervals in one call of ``f``."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise FloatingPointError("integrand returned a non-finite value")
    k = half * (fx @ _KRONROD)
    g = half * (fx @ _GAUSS)
    kabs = np.abs(half) * (np.abs(fx) @ _KRONROD)
    return k, np.abs(k - g), kabs


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              cfg: QuadratureConfig = QuadratureConfig(),
              points: Iterable[float] | None = None) -> QuadResult:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].

    ``f`` is called with a 1-D array of abscissae and must return an array of
    the same shape.  ``points`` are interior breakpoints (kinks, segment joins)
    used as the initial partition.

    The iteration stops once the summed error estimate is below
    ``max(rel_tol * |I|, abs_tol)``; a floor of 50 eps * integral(|f|) guards
    against chasing round-off.  Intervals whose share of the error is too big
    are bisected; an interval that would pass ``max_depth`` bisections raises
    :class:`ConvergenceError` carrying the current estimate.
    """
    a = float(a)
    b = float(b)
    if not a <= b:
        raise ValueError(f"integrate requires a <= b, got [{a}, {b}]")
    if a == b:
        return QuadResult(0.0, 0.0)

    edges = [a]
    if points is not None:
        edges.extend(sorted(p for p in set(float(p) for p in points) if a < p < b))
    edges.append(b)
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    depth = np.zeros(lo.size, dtype=int)
    val, err, vabs = _gk15(f, lo, hi)
    length = b - a

    while True:
        total = float(np.sum(val))
        total_err = float(np.sum(err))
        tol = max(cfg.rel_tol * abs(total), cfg.abs_tol, 50.0 * EPS * float(np.sum(vabs)))
        if total_err <= tol:
            return QuadResult(total, total_err)

        share = tol * (hi - lo) / length
        bad = err > share
        if not np.any(bad):  # pragma: no cover - shares sum to tol
            bad = err == err.max()
        if np.any(depth[bad] >= cfg.max_depth):
            raise ConvergenceError(
                f"quadrature on [{a:.6g}, {b:.6g}] exceeded max_depth={cfg.max_depth}",
                value=total, error_estimate=total_err)

        blo, bhi, bdepth = lo[bad], hi[bad], depth[bad] + 1
        bmid = 0.5 * (blo + bhi)
        new_lo = np.concatenate([blo, bmid])
        new_hi = np.concatenate([bmid, bhi])
        nv, ne, na = _gk15(f, new_lo, new_hi)

        keep = ~bad
        # Re-sort by left edge so summation order never depends on history.
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        depth = np.concatenate([depth[keep], bdepth, bdepth])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        vabs = np.concatenate([vabs[keep], na])
        order = np.argsort(lo, kind="stable")
        lo, hi, depth = lo[order], hi[order], depth[order]
        val, err, vabs = val[order], err[order], vabs[order]


def find_root(g: Callable[[float], float], bracket: tuple[float, float],
              cfg: RootConfig = RootConfig()) -> float:
    """Root of g inside a sign-changing bracket, by Brent's method."""
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise RootError(f"invalid bracket [{lo}, {hi}]")
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if np.sign(glo) == np.sign(ghi):
        raise RootError(f"g does not change sign on [{lo:.6g}, {hi:.6g}]: "
                        f"g(lo)={glo:.3g}, g(hi)={ghi:.3g}")
    rtol = max(cfg.rel_tol, 4.0 * EPS)
    try:
        root, info = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=rtol,
                                     maxiter=cfg.max_iter, full_output=True,
                                     disp=False)
    except ValueError as exc:  # pragma: no cover - sign checked above
        raise RootError(str(exc)) from exc
    if not info.converged:
        raise RootError(f"root finder did not converge in {cfg.max_iter} iterations")
    return float(root)
