"""Command-line entry point: ``shortcut-qse {run,adiabatic,selftest}``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .errors import ShortcutError
from .experiments import (
    ScenarioConfig,
    ensure_writable,
    load_config,
    run_adiabatic,
    run_full_sweep,
    run_nonadiabatic,
    write_quench_profiles,
    write_trace_distance,
    write_work_power,
)
from .experiments import _fmt as fmt
from .selftest import run_selftest


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key = value scenario file")
    parser.add_argument("--steps", type=int, help="recorded grid steps N")
    parser.add_argument("--threshold", type=float, help="trace-distance threshold for tau_f")
    parser.add_argument("--out", type=Path, help="output directory for CSV files")
    parser.add_argument("--jobs", type=int, help="concurrent per-n runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shortcut-qse", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="full sweep, or a single quench with --n")
    _common(run)
    run.add_argument("--n", type=int, help="run only this quench index")
    adiabatic = sub.add_parser("adiabatic", help="brachistochrone baseline only")
    _common(adiabatic)
    selftest = sub.add_parser("selftest", help="property battery")
    selftest.add_argument("--config", type=Path)
    return parser


def resolve_config(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else ScenarioConfig()
    return config.replace(
        steps=getattr(args, "steps", None),
        tau_f_threshold=getattr(args, "threshold", None),
        output_dir=getattr(args, "out", None),
        jobs=getattr(args, "jobs", None),
    )


def _summary(rows: list[tuple], out=None) -> None:
    out = out or sys.stdout
    print("protocol,n,tau_f,avg_work,avg_power,final_delta", file=out)
    for row in rows:
        print(",".join(fmt(v) for v in row), file=out)


def cmd_run(args) -> int:
    config = resolve_config(args)
    start = time.perf_counter()
    if args.n is None:
        result = run_full_sweep(config)
        runs, adiabatic = result.runs, result.adiabatic
        files = list(result.files.values())
    else:
        config = config.replace(n_list=[args.n])
        out_dir = ensure_writable(config.output_dir)
        runs, adiabatic = [run_nonadiabatic(config, args.n)], None
        files = [
            write_quench_profiles(out_dir / "quench_profiles.csv", config, runs),
            write_trace_distance(out_dir / "trace_distance.csv", config, runs, None),
            write_work_power(out_dir / "work_power.csv", config, runs, None),
        ]
    rows = [("nonadiabatic", r.n, r.tau_f, r.work.avg_work, r.work.avg_power, r.final_delta) for r in runs]
    if adiabatic is not None:
        a = adiabatic
        rows.append(("adiabatic", None, 1.0, a.work.avg_work, a.work.avg_power, a.final_delta))
    _summary(rows)
    for r in runs:
        if not r.converged:
            print(f"# n={r.n}: threshold {config.tau_f_threshold} not reached", file=sys.stderr)
    for path in files:
        print(f"# wrote {path}", file=sys.stderr)
    print(f"# elapsed {time.perf_counter() - start:.2f} s", file=sys.stderr)
    return 0


def cmd_adiabatic(args) -> int:
    config = resolve_config(args)
    out_dir = ensure_writable(config.output_dir)
    run = run_adiabatic(config)
    write_trace_distance(out_dir / "trace_distance.csv", config, [], run)
    write_work_power(out_dir / "work_power.csv", config, [], run)
    _summary([("adiabatic", None, 1.0, run.work.avg_work, run.work.avg_power, run.final_delta)])
    m = run.margin
    print(f"# local adiabatic margin: max ratio {m.max_ratio:.6f} ({'ok' if m.passed else 'violated'})", file=sys.stderr)
    return 0


def cmd_selftest(args) -> int:
    config = load_config(args.config) if args.config else ScenarioConfig()
    results = run_selftest(config)
    for check in results:
        print(f"{'PASS' if check.passed else 'FAIL'}  {check.name}: {check.detail}")
    failed = sum(not c.passed for c in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


COMMANDS = {"run": cmd_run, "adiabatic": cmd_adiabatic, "selftest": cmd_selftest}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ShortcutError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
