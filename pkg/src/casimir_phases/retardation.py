"""Light-cone delays for a single reflection off the plate.

A field emitted at time t' by a dipole on the source path is reflected by the
plate and reaches the observer path at t' + tau, where tau solves

    c tau = | r_obs(t' + tau) - r_src,image(t') |,

with the image point obtained by flipping the sign of z.  For a single path
the source and observer coincide.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .core import C_LIGHT
from .numerics import RootConfig, RootError, find_root
from .trajectory import Trajectory


class DelaySolution(NamedTuple):
    tau: float
    source_time: float
    mean_distance: float


def image_distance(src: Trajectory, obs: Trajectory, t_src: float, tau: float) -> float:
    dx = obs.x_at(t_src + tau) - src.x_at(t_src)
    dz = obs.z_at(t_src + tau) + src.z_at(t_src)
    return math.hypot(dx, dz)


def roundtrip_delay_pair(src: Trajectory, obs: Trajectory, t_src: float,
                         cfg: RootConfig = RootConfig()) -> DelaySolution:
    """Delay from ``src`` at ``t_src`` to ``obs`` via one reflection.

    The mean distance is (z_src(t_src) + z_obs(t_src + tau)) / 2.  The search
    bracket is [0, 2 d0 / c] with d0 the image distance at zero delay, clipped
    to the observer's domain; for relative speeds well below c the light-cone
    residual changes sign exactly once in it.
    """
    z_src = src.z_at(t_src)
    d0 = image_distance(src, obs, t_src, 0.0)
    hi = min(2.0 * d0 / C_LIGHT, obs.t_max - t_src)
    if not hi > 0:
        raise RootError(f"observer domain ends at t={obs.t_max!r}, no room for a delay")

    def residual(tau):
        return C_LIGHT * tau - image_distance(src, obs, t_src, tau)

    try:
        tau = find_root(residual, (0.0, hi), cfg)
    except RootError as exc:
        raise RootError(
            f"no light-cone solution from t'={t_src:.6g} s within tau <= {hi:.4g} s "
            f"(path too fast or domain margin too short): {exc}") from exc
    z_obs = obs.z_at(t_src + tau)
    return DelaySolution(tau, t_src, 0.5 * (z_src + z_obs))


def roundtrip_delay_self(traj: Trajectory, t_src: float,
                         cfg: RootConfig = RootConfig()) -> DelaySolution:
    return roundtrip_delay_pair(traj, traj, t_src, cfg)
