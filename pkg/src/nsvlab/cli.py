"""Command-line entry point.

    nsvlab simulate <config>   [--output-dir D] [--threads N] [--seed S]
    nsvlab verify <suite>      [--seed S]
    nsvlab experiment <spec>   [--output-dir D] [--threads N] [--seed S]

Exit codes: 0 success, 1 configuration/usage error, 2 solver failure (the
manifest is still written, with the error and the failing time recorded).
Identical configurations produce byte-identical CSV ledgers.
"""

from __future__ import annotations

import argparse
import json
import sys
import time as _time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, build_experiment, build_simulation, parse_config_file
from .experiments import run_experiment
from .solver import FixedPointDiverged, integrate, solve_regularized
from .verify import SUITES, run_suite

__all__ = ["main", "console_main"]


def _write_manifest(outdir: Path, payload: dict) -> Path:
    path = outdir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return path


def _sections_echo(sections: dict) -> dict:
    return {name: dict(body) for name, body in sections.items() if body}


def cmd_simulate(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    started = _time.perf_counter()
    try:
        sections = parse_config_file(args.config)
        config, params, v0 = build_simulation(sections, seed=args.seed)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    manifest = {
        "command": "simulate",
        "version": __version__,
        "config": _sections_echo(sections),
        "outputs": [],
        "verifications": {},
        "error": None,
    }
    runner = solve_regularized if params.regularization is not None else integrate
    try:
        traj = runner(config, params, v0)
    except FixedPointDiverged as exc:
        manifest["error"] = {"type": "FixedPointDiverged", "message": str(exc),
                             "failing_time": exc.time}
        if exc.partial is not None and len(exc.partial.ledger):
            ledger_path = outdir / "ledger.csv"
            exc.partial.ledger.to_csv(ledger_path)
            manifest["outputs"].append(str(ledger_path))
        manifest["wall_clock_s"] = _time.perf_counter() - started
        _write_manifest(outdir, manifest)
        print(f"solver failure at t={exc.time}: {exc}", file=sys.stderr)
        return 2

    ledger_path = outdir / "ledger.csv"
    traj.ledger.to_csv(ledger_path)
    summary_path = outdir / "summary.json"
    traj.ledger.to_json_summary(summary_path)
    from .plots import energy_series

    figure_path = energy_series(traj.ledger, outdir / "energy.png",
                                title="Simulation energy ledger")
    manifest["outputs"] = sorted([str(ledger_path), str(summary_path), figure_path])

    final = traj.final()
    div_rel = final.divergence_max() / max(np.sqrt(final.grad_norm_sq()), 1e-300)
    energy = traj.ledger.energy()
    checks = {
        "divergence_free": bool(div_rel <= 1e-10),
        "energy_finite": bool(np.all(np.isfinite(energy))),
    }
    if params.forcing is None:
        checks["dissipation_monotone"] = bool(
            np.all(np.diff(energy) <= config.dt**2 * max(energy[0], 1.0)))
    manifest["verifications"] = checks
    manifest["wall_clock_s"] = _time.perf_counter() - started
    _write_manifest(outdir, manifest)
    ok = all(checks.values())
    for name, passed in checks.items():
        print(f"[{'PASS' if passed else 'FAIL'}] {name}")
    return 0 if ok else 2


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}",
              file=sys.stderr)
        return 1
    checks = run_suite(args.suite, seed=args.seed)
    all_ok = True
    for name, ok, detail in checks:
        all_ok = all_ok and ok
        print(f"[{'PASS' if ok else 'FAIL'}] {name} ({detail})")
    return 0 if all_ok else 2


def cmd_experiment(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        sections = parse_config_file(args.spec)
        spec = build_experiment(sections, str(outdir), seed=args.seed)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        manifest = run_experiment(spec, threads=args.threads, seed=args.seed)
    except FixedPointDiverged as exc:
        _write_manifest(outdir, {
            "command": "experiment",
            "version": __version__,
            "config": _sections_echo(sections),
            "outputs": [],
            "error": {"type": "FixedPointDiverged", "message": str(exc),
                      "failing_time": exc.time},
        })
        print(f"solver failure at t={exc.time}: {exc}", file=sys.stderr)
        return 2
    print(f"experiment {spec.kind}: wrote {len(manifest['outputs']) + 1} files to {outdir}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nsvlab",
        description="Spectral Galerkin solver and verification lab for "
                    "power-law Navier-Stokes-Voigt flow.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default="nsvlab-out",
                        help="directory for CSV/JSON/figure output")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for experiment sweeps")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for randomized fixtures")

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="run one simulation from a config file")
    p_sim.add_argument("config")
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify", help="run a named invariant suite")
    p_ver.add_argument("suite", help=f"one of {sorted(SUITES)}")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.set_defaults(func=cmd_verify)

    p_exp = sub.add_parser("experiment", parents=[common],
                           help="run a scripted study from a spec file")
    p_exp.add_argument("spec")
    p_exp.set_defaults(func=cmd_experiment)

    args = parser.parse_args(argv)
    return args.func(args)


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
