"""JSON scenario documents.

A document has the sections ``atom``, ``potential``, ``window``,
``trajectories``, ``numerics`` and ``run``; all quantities are SI.
:func:`normalize` fills in defaults, so ``parse(normalize(doc))`` builds the
same scenario as ``parse(doc)`` and a normalized document is a fixed point.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .core import Atom, ExternalPotential
from .interferometer import SHORT_DISTANCE_MAX, Limits, Scenario
from .numerics import QuadratureConfig, RootConfig
from .phases import METHODS
from .trajectory import (ACCEL_RATIO_MAX, DEFAULT_V_MAX, DEFAULT_Z_MIN, ScenarioWindow,
                         TrajectoryError, make_primitive)


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending field."""


_TRAJ_PARAMS = {
    "static": {"z0": None},
    "linear": {"z0": None, "v": None},
    "ballistic": {"z0": None, "v0": 0.0, "g": 9.81},
    "sinusoidal": {"z0": None, "amplitude": None, "omega": None, "phase": 0.0,
                   "interp_tol": 1e-9},
    "piecewise": {"segments": None},
}
_TRAJ_COMMON = {"label": None, "kind": None, "parallel_velocity": 0.0, "parallel_origin": 0.0}

_DEFAULTS = {
    "atom": {"omega0": None, "alpha0_over_4pieps0": None, "mass": None, "internal_energy": 0.0},
    "window": {"T": None, "delay_margin": 1e-12},
    "numerics": {
        "quad": {"rel_tol": QuadratureConfig.rel_tol, "abs_tol": QuadratureConfig.abs_tol,
                 "max_depth": QuadratureConfig.max_depth},
        "root": {"rel_tol": RootConfig.rel_tol, "max_iter": RootConfig.max_iter},
        "z_min": DEFAULT_Z_MIN,
        "v_max": DEFAULT_V_MAX,
        "accel_ratio_max": ACCEL_RATIO_MAX,
        "short_distance_max": SHORT_DISTANCE_MAX,
        "eom_tol": None,
    },
    "run": {"dp_method": "first_order", "time_dilation": 1.0},
}
_POTENTIAL_FIELDS = {
    "none": {},
    "linear": {"gradient": None},
    "harmonic": {"stiffness": None, "center": [0.0, 0.0, 0.0]},
}


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    document: dict


def _fill(section: Any, defaults: dict, where: str) -> dict:
    if section is None:
        section = {}
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(section) - set(defaults)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    out = {}
    for key, default in defaults.items():
        if isinstance(default, dict):
            out[key] = _fill(section.get(key), default, f"{where}.{key}")
        elif key in section:
            out[key] = section[key]
        elif default is None and key not in ("eom_tol", "label"):
            raise ConfigError(f"{where}.{key}: required field missing")
        else:
            out[key] = default
    return out


def normalize(doc: dict) -> dict:
    """Return a copy of ``doc`` with every optional field made explicit."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - {"atom", "potential", "window", "trajectories", "numerics", "run"}
    if unknown:
        raise ConfigError(f"unknown top-level section(s) {sorted(unknown)}")
    out = {name: _fill(doc.get(name), defaults, name) for name, defaults in _DEFAULTS.items()}

    pot = doc.get("potential") or {"kind": "none"}
    if not isinstance(pot, dict):
        raise ConfigError("potential: expected an object")
    kind = pot.get("kind", "none")
    if kind not in _POTENTIAL_FIELDS:
        raise ConfigError(f"potential.kind: expected one of {sorted(_POTENTIAL_FIELDS)}, got {kind!r}")
    out["potential"] = {"kind": kind,
                        **_fill({k: v for k, v in pot.items() if k != "kind"},
                                _POTENTIAL_FIELDS[kind], "potential")}

    trajs = doc.get("trajectories")
    if not isinstance(trajs, list) or len(trajs) < 2:
        raise ConfigError("trajectories: expected a list of at least two arms")
    norm = []
    for i, t in enumerate(trajs):
        where = f"trajectories.{i}"
        if not isinstance(t, dict):
            raise ConfigError(f"{where}: expected an object")
        kind = t.get("kind")
        if kind not in _TRAJ_PARAMS:
            raise ConfigError(f"{where}.kind: expected one of {sorted(_TRAJ_PARAMS)}, got {kind!r}")
        entry = _fill(t, {**_TRAJ_COMMON, **_TRAJ_PARAMS[kind]}, where)
        if entry["label"] is None:
            entry["label"] = str(i + 1)
        entry["label"] = str(entry["label"])
        norm.append(entry)
    out["trajectories"] = norm

    method = out["run"]["dp_method"]
    if method not in METHODS:
        raise ConfigError(f"run.dp_method: expected one of {list(METHODS)}, got {method!r}")
    return out


def _float(value, where):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None


def build_scenario(doc: dict) -> Scenario:
    """Construct the scenario described by a (normalized or raw) document.

    Path checks are not enforced here; use :meth:`Scenario.checks`.
    """
    d = normalize(doc)
    try:
        a = d["atom"]
        atom = Atom(*(_float(a[k], f"atom.{k}") for k in
                      ("omega0", "alpha0_over_4pieps0", "mass", "internal_energy")))
        w = d["window"]
        window = ScenarioWindow(_float(w["T"], "window.T"),
                                _float(w["delay_margin"], "window.delay_margin"))
        p = d["potential"]
        pot = ExternalPotential(p["kind"], **{k: v for k, v in p.items() if k != "kind"})
        n = d["numerics"]
        quad = QuadratureConfig(_float(n["quad"]["rel_tol"], "numerics.quad.rel_tol"),
                                _float(n["quad"]["abs_tol"], "numerics.quad.abs_tol"),
                                int(n["quad"]["max_depth"]))
        root = RootConfig(_float(n["root"]["rel_tol"], "numerics.root.rel_tol"),
                          int(n["root"]["max_iter"]))
        limits = Limits(_float(n["z_min"], "numerics.z_min"),
                        _float(n["v_max"], "numerics.v_max"),
                        _float(n["accel_ratio_max"], "numerics.accel_ratio_max"),
                        _float(n["short_distance_max"], "numerics.short_distance_max"),
                        None if n["eom_tol"] is None else _float(n["eom_tol"], "numerics.eom_tol"))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    trajs = []
    for i, t in enumerate(d["trajectories"]):
        params = {k: v for k, v in t.items() if k != "kind"}
        for k, v in params.items():
            if k not in ("label", "segments"):
                params[k] = _float(v, f"trajectories.{i}.{k}")
        try:
            trajs.append(make_primitive(t["kind"], t_end=window.domain_end, check=False,
                                        **params))
        except (TrajectoryError, TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"trajectories.{i}: {exc}") from exc

    sc = Scenario(atom, tuple(trajs), window, pot, quad, root, d["run"]["dp_method"], limits)
    factor = _float(d["run"]["time_dilation"], "run.time_dilation")
    if factor != 1.0:
        if not factor > 0:
            raise ConfigError("run.time_dilation: must be > 0")
        sc = sc.time_dilated(factor)
    return sc


def load(path: str | Path) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_document(doc)


def from_document(doc: dict) -> RunConfig:
    norm = normalize(doc)
    return RunConfig(build_scenario(norm), norm)


def dumps(doc: dict) -> str:
    return json.dumps(normalize(doc), indent=2, sort_keys=True) + "\n"


def set_path(doc: dict, dotted: str, value: Any) -> dict:
    """Copy of the normalized ``doc`` with ``dotted`` set to ``value``.

    List indices are integers; ``*`` addresses every list element.  Only
    fields present in the normalized document may be set.
    """
    out = copy.deepcopy(normalize(doc))
    parts = dotted.split(".")
    if not dotted or any(not p for p in parts):
        raise ConfigError(f"bad parameter path {dotted!r}")

    def assign(node, keys, where):
        key, rest = keys[0], keys[1:]
        if isinstance(node, list):
            if key == "*":
                targets = range(len(node))
            else:
                try:
                    targets = [int(key)]
                    node[targets[0]]
                except (ValueError, IndexError):
                    raise ConfigError(f"{dotted}: no list element {key!r} at {where}") from None
            for i in targets:
                if rest:
                    assign(node[i], rest, f"{where}.{i}")
                else:
                    node[i] = value
            return
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"{dotted}: no field {key!r} at {where or 'root'}")
        if rest:
            assign(node[key], rest, f"{where}.{key}" if where else key)
        else:
            node[key] = value

    assign(out, parts, "")
    return out
