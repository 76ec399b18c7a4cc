"""Command-line entry point: ``slowlight <subcommand> [--config F] [--out DIR] [--check]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 failed ``--check`` assertions, 5 output I/O failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import dispersion as disp
from .config import ConfigError, RunConfig, expand_floats, parse_config, scale_resolution, serialize
from .dispersion import Branch
from .io import OutputError, emit_csv, emit_json, emit_jsonl, write_manifest
from .medium import ProfileDomainError
from .rays import StepFailure, launch_ray, trace
from .scenarios import (
    DISPERSION_COLUMNS,
    SCENARIO_NAMES,
    ScenarioReport,
    events_payload,
    grid_of,
    integrator_config,
    ray_table,
    run_scenario,
    run_sonar,
    wave_run,
)
from .wave import build_operator

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK, EXIT_IO = 0, 2, 3, 4, 5

NUMERICAL_ERRORS = (disp.EvanescentRegion, disp.NoTurningPoint, StepFailure, ProfileDomainError,
                    FloatingPointError, ArithmeticError)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI-style run configuration")
    common.add_argument("--out", type=Path, default=Path("run"), help="output directory (default: ./run)")
    common.add_argument("--check", action="store_true", help="evaluate built-in acceptance assertions")
    common.add_argument("--resolution-scale", type=float, default=1.0, metavar="F",
                        help="multiply the wave grid size by F (rounded to a power of two)")

    ap = argparse.ArgumentParser(prog="slowlight", description="Slow-light pulses in moving media")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("dispersion", parents=[common], help="tabulate k and v over a (delta, u, v_g) grid")
    sub.add_parser("ray", parents=[common], help="trace one ray from the configured launch point")
    sub.add_parser("wave", parents=[common], help="evolve one wave packet from the configured launch point")
    sc = sub.add_parser("scenario", parents=[common], help="run a canned figure reproduction")
    sc.add_argument("name", choices=SCENARIO_NAMES)
    sub.add_parser("sweep", parents=[common], help="reflected-phase sweep (flow drop or group velocity)")
    return ap


def load_config(args) -> tuple[RunConfig, str]:
    text = args.config.read_text(encoding="utf-8") if args.config else ""
    scenario = args.name if args.command == "scenario" else ("sonar" if args.command == "sweep" and not text else None)
    cfg = parse_config(text, scenario=scenario)
    if args.command == "sweep" and "sweep" not in cfg.values:
        raise ConfigError("sweep needs a [sweep] section (or no config for the default sonar sweep)")
    if args.resolution_scale != 1.0:
        cfg = scale_resolution(cfg, args.resolution_scale)
    return cfg, text


def base_derived(cfg: RunConfig) -> dict:
    spec = cfg.medium()
    profiles = cfg.profiles()
    vg = profiles.group_velocity(cfg["launch"]["z"])
    op = build_operator(profiles, spec, grid_of(cfg), v_g_ref=vg)
    return {
        "k0_per_m": spec.k0,
        "kappa_m2_per_s": op.kappa,
        "effective_mass_kg": op.mass_report,
        "grid_dz_m": grid_of(cfg).dz,
    }


# ---------------------------------------------------------------------------
# subcommands; each returns a ScenarioReport-like record of tables and checks


def cmd_dispersion(cfg: RunConfig) -> ScenarioReport:
    spec = cfg.medium()
    d = cfg["dispersion"] if "dispersion" in cfg.values else parse_config("", "figure1")["dispersion"]
    branches = (Branch.PLUS, Branch.MINUS) if d["branch"] == "both" else (Branch.parse(d["branch"]),)
    rep = ScenarioReport("dispersion")
    rows = []
    worst = 0.0
    for vg in expand_floats(d["v_g"]):
        for delta in expand_floats(d["delta"]):
            for br in branches:
                for u in expand_floats(d["u"]):
                    r = disp.dispersion_query(float(delta), float(u), float(vg), spec, br)
                    rows.append((r.delta, r.u, r.v_g, br.label, r.k, r.v, r.regime, r.in_local_window))
                    if r.k is not None:
                        omega = spec.omega0 * (1.0 + r.delta)
                        res = disp.residual_slowlight(r.k, omega, r.u, spec, r.v_g) / spec.k0 ** 2
                        worst = max(worst, abs(float(res)))
    rep.tables["dispersion"] = (DISPERSION_COLUMNS, rows)
    rep.q("max_residual", worst, "1", "analytic")
    rep.checks["residual_below_1e-9"] = worst <= 1e-9
    return rep


def cmd_ray(cfg: RunConfig) -> ScenarioReport:
    spec = cfg.medium()
    profiles = cfg.profiles()
    grid = grid_of(cfg)
    state, omega = launch_ray(cfg["launch"]["z"], cfg.launch_delta(), cfg.branch(), profiles, spec)
    traj = trace(state, omega, profiles, integrator_config(cfg, max_turns=None), spec,
                 t_end=cfg["integrator"]["t_end"], z_bounds=(grid.z_min, grid.z_max))
    rep = ScenarioReport("ray")
    rep.tables["ray"] = ray_table(traj)
    rep.events["ray"] = events_payload(traj)
    rep.q("ray_omega_drift", float(np.max(np.abs(traj.omega_drift))), "1", "ray")
    rep.checks["ray_frequency_conserved"] = rep.value("ray_omega_drift") <= 1e-9
    return rep


def cmd_wave(cfg: RunConfig) -> ScenarioReport:
    rep = ScenarioReport("wave")
    wave_run(cfg, cfg.medium(), cfg.profiles(), cfg.launch_delta(), rep)
    if cfg["wave"]["boundary"] == "periodic":
        rep.checks["wave_norm_conserved"] = rep.value("wave_norm_drift") <= 1e-6
    return rep


def write_outputs(rep: ScenarioReport, out: Path) -> list[str]:
    files = []
    for stem, (columns, rows) in rep.tables.items():
        files.append(emit_csv(out / f"{stem}.csv", columns, rows).name)
    if rep.events:
        files.append(emit_json(out / "events.json", rep.events).name)
    if rep.snapshots:
        files.append(emit_jsonl(out / "snapshots.jsonl", rep.snapshots).name)
    files.append(emit_json(out / "report.json", rep.summary()).name)
    return files


def run(args) -> int:
    try:
        cfg, text = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out
    try:
        out.mkdir(parents=True, exist_ok=True)
        resolved = serialize(cfg)
        derived = base_derived(cfg)
        write_manifest(out, text, {"resolved_text": resolved, "values": cfg.values}, derived)
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"output error: cannot create {out}: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.command == "dispersion":
            rep = cmd_dispersion(cfg)
        elif args.command == "ray":
            rep = cmd_ray(cfg)
        elif args.command == "wave":
            rep = cmd_wave(cfg)
        elif args.command == "sweep":
            rep = run_sonar(cfg)
        else:
            rep = run_scenario(cfg)
    except NUMERICAL_ERRORS as exc:
        write_manifest(out, text, {"resolved_text": resolved, "values": cfg.values}, derived, status="numerical-failure")
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    try:
        files = write_outputs(rep, out)
        derived.update(rep.derived)
        status = "ok"
        if args.check and not rep.passed:
            status = "check-failed"
        write_manifest(out, text, {"resolved_text": resolved, "values": cfg.values}, derived, files, status=status)
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.check:
        for name, ok in rep.checks.items():
            print(f"{'PASS' if ok else 'FAIL'} {name}")
        if not rep.passed:
            return EXIT_CHECK
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
