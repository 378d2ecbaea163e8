"""Command-line front end.

    casimir-phases validate CONFIG
    casimir-phases run CONFIG --out DIR [--dp-method first_order|retarded] [--workers N]
    casimir-phases sweep CONFIG --param DOTTED.PATH --values V1,V2,... --out DIR

Exit codes: 0 success, 1 configuration/validation failure, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import config as cfgmod
from .config import ConfigError
from .interferometer import (PhaseComputationError, Scenario, ScenarioError,
                             additivity_report, coherence_matrix, extract_dp12,
                             magnitude_report)
from .trajectory import TrajectoryError

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def validation_lines(sc: Scenario) -> tuple[bool, list[str]]:
    checks = sc.checks()
    return all(c.ok for c in checks), [c.describe() for c in checks]


def _load(path, dp_method=None):
    doc = cfgmod.load(path).document
    if dp_method:
        doc = cfgmod.set_path(doc, "run.dp_method", dp_method)
    return doc, cfgmod.build_scenario(doc)


# results -------------------------------------------------------------------


def compute(sc: Scenario, workers: int = 1) -> dict:
    m = coherence_matrix(sc, workers=workers)
    mags = magnitude_report(sc, m)
    add = additivity_report(m) if m.n >= 3 else None
    ext = extract_dp12(m) if m.n == 3 else None
    return {"matrix": m, "magnitudes": mags, "additivity": add, "extraction": ext}


def scalar_columns(labels) -> list[str]:
    cols = []
    for lab in labels:
        cols += [f"phi0_{lab}_rad", f"phi_vdw_{lab}_rad", f"sp_dynamical_{lab}_rad"]
    for a, b in itertools.combinations(labels, 2):
        cols.append(f"dp_{a}_{b}_rad")
    cols += ["extraction_estimate_rad", "extraction_true_dp12_rad",
             "extraction_relative_error_ratio", "vdw_scale_rad", "sp_dynamical_scale_rad",
             "dp_scale_rad", "beta_ratio"]
    return cols


def scalar_values(res: dict) -> list:
    m = res["matrix"]
    vals = []
    for i in range(m.n):
        vals += [m.phi0[i], m.phi_vdw[i], m.sp_dynamical[i]]
    for j, k in itertools.combinations(range(m.n), 2):
        vals.append(m.dp[j, k])
    ext = res["extraction"]
    vals += [ext.estimate, ext.true_dp12, ext.relative_error] if ext else ["", "", ""]
    g = res["magnitudes"]
    vals += [g.vdw_scale, g.sp_dynamical_scale, g.dp_scale, g.beta]
    return vals


def write_run(out: Path, sc: Scenario, doc: dict, res: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    m = res["matrix"]
    labels = m.labels
    phi, std = m.phases(), m.standard()

    write_csv(out / "arms.csv",
              ["arm", "phi0_rad", "phi_vdw_rad", "sp_dynamical_rad", "phi_sp_rad",
               "z_start_m", "z_end_m", "max_abs_vz_m_per_s"],
              [[lab, m.phi0[i], b.phi_vdw, b.sp_dynamical, b.phi_sp,
                t.z_at(0.0), t.z_at(sc.window.T), t.max_abs_vz(0.0, sc.window.T)]
               for i, (lab, b, t) in enumerate(zip(labels, m.single_path, sc.trajectories))])
    write_csv(out / "coherence_matrix.csv",
              ["arm_j", "arm_k", "phi_rad", "standard_rad", "dp_rad"],
              [[labels[j], labels[k], phi[j, k], std[j, k], m.dp[j, k]]
               for j in range(m.n) for k in range(m.n)])
    write_csv(out / "dp_phases.csv", ["arm_j", "arm_k", "method", "dp_rad"],
              [[labels[j], labels[k], m.method, m.dp[j, k]]
               for j, k in itertools.combinations(range(m.n), 2)])
    add = res["additivity"]
    if add is not None:
        write_csv(out / "additivity.csv",
                  ["arm_j", "arm_l", "arm_k", "residual_rad", "standard_residual_rad",
                   "dp_combination_rad"],
                  [[labels[t.j], labels[t.l], labels[t.k], t.residual, t.standard_residual,
                    t.dp_combination] for t in add.triples])
    ext = res["extraction"]
    if ext is not None:
        write_csv(out / "extraction.csv",
                  ["estimate_rad", "true_dp12_rad", "relative_error_ratio", "defined_flag"],
                  [[ext.estimate, ext.true_dp12, ext.relative_error, ext.defined]])
    g = res["magnitudes"]
    write_csv(out / "magnitudes.csv",
              ["vdw_scale_rad", "sp_dynamical_scale_rad", "dp_scale_rad", "beta_ratio",
               "sp_ratio_over_beta_ratio", "dp_ratio_over_beta_ratio"],
              [[g.vdw_scale, g.sp_dynamical_scale, g.dp_scale, g.beta,
                g.sp_ratio_over_beta, g.dp_ratio_over_beta]])
    (out / "config.json").write_text(cfgmod.dumps(doc), encoding="utf-8")
    (out / "summary.txt").write_text(summary(sc, res), encoding="utf-8")


def summary(sc: Scenario, res: dict) -> str:
    m = res["matrix"]
    lines = [f"arms: {', '.join(m.labels)}   method: {m.method}   T = {sc.window.T:.6g} s",
             f"decoherence: {m.decoherence}", ""]
    lines.append("single-path phases (rad)")
    for lab, p0, b in zip(m.labels, m.phi0, m.single_path):
        lines.append(f"  {lab:>6}: phi0={p0:+.10e}  vdw={b.phi_vdw:+.10e}  "
                     f"sp_dyn={b.sp_dynamical:+.10e}")
    lines.append("double-path phases (rad)")
    for j, k in itertools.combinations(range(m.n), 2):
        lines.append(f"  dp[{m.labels[j]},{m.labels[k]}] = {m.dp[j, k]:+.10e}")
    add = res["additivity"]
    if add is not None:
        lines.append(f"standard additivity: max residual {add.max_standard_residual:.3e} "
                     f"(tol {add.standard_tolerance:.3e}) "
                     f"{'ok' if add.standard_additive else 'VIOLATED'}")
        lines.append(f"DP bookkeeping: max error {add.max_bookkeeping_error:.3e} "
                     f"{'ok' if add.bookkeeping_ok else 'MISMATCH'}")
    ext = res["extraction"]
    if ext is not None:
        rel = f"{ext.relative_error:.4e}" if ext.defined else "undefined (dp_12 ~ 0)"
        lines.append(f"extraction: estimate {ext.estimate:+.10e} rad, "
                     f"true dp_12 {ext.true_dp12:+.10e} rad, relative error {rel}")
    g = res["magnitudes"]
    lines.append(f"magnitudes: |vdw| {g.vdw_scale:.4e}, |sp_dyn| {g.sp_dynamical_scale:.4e}, "
                 f"|dp| {g.dp_scale:.4e} rad; beta = max|zdot|/c = {g.beta:.4e}")
    return "\n".join(lines) + "\n"


# commands --------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        _, sc = _load(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    ok, lines = validation_lines(sc)
    print("\n".join(lines))
    print("valid" if ok else "INVALID")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_run(args) -> int:
    try:
        doc, sc = _load(args.config, args.dp_method)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    ok, lines = validation_lines(sc)
    if not ok:
        print("\n".join(lines), file=sys.stderr)
        print("INVALID: refusing to run", file=sys.stderr)
        return EXIT_INVALID
    try:
        res = compute(sc, args.workers)
    except (PhaseComputationError, ScenarioError, TrajectoryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = Path(args.out)
    write_run(out, sc, doc, res)
    print(summary(sc, res), end="")
    return EXIT_OK


def _sweep_row(task):
    doc, param, value = task
    try:
        d = cfgmod.set_path(doc, param, value)
        sc = cfgmod.build_scenario(d)
        failed = [c for c in sc.checks() if not c.ok]
        if failed:
            return None, "validation: " + "; ".join(c.describe() for c in failed)
        return scalar_values(compute(sc)), ""
    except (ConfigError, ScenarioError, TrajectoryError) as exc:
        return None, f"config: {exc}"
    except PhaseComputationError as exc:
        return None, f"numeric: {exc}"


def cmd_sweep(args) -> int:
    try:
        doc, base = _load(args.config, args.dp_method)
        cfgmod.set_path(doc, args.param, 0.0)
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"bad --values: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if not values:
        print("--values is empty", file=sys.stderr)
        return EXIT_INVALID

    tasks = [(doc, args.param, v) for v in values]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_row, tasks))
    else:
        results = [_sweep_row(t) for t in tasks]

    cols = scalar_columns(base.labels)
    rows = []
    for v, (vals, err) in zip(values, results):
        rows.append([args.param, v] + (vals if vals is not None else [""] * len(cols)) + [err])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", ["sweep_param", "sweep_value_si"] + cols + ["error"], rows)
    (out / "config.json").write_text(cfgmod.dumps(doc), encoding="utf-8")
    n_err = sum(1 for _, e in results if e)
    print(f"{len(values)} rows written to {out / 'sweep.csv'} ({n_err} failed)")
    return EXIT_OK if n_err == 0 else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="casimir-phases", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scenario against all preconditions")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="compute coherences, additivity and extraction")
    r.add_argument("config")
    r.add_argument("--out", required=True)
    r.add_argument("--dp-method", choices=["first_order", "retarded"])
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="repeat a run over values of one parameter")
    s.add_argument("config")
    s.add_argument("--param", required=True, help="dotted path, e.g. trajectories.2.z0")
    s.add_argument("--values", required=True, help="comma-separated numbers")
    s.add_argument("--out", required=True)
    s.add_argument("--dp-method", choices=["first_order", "retarded"])
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
