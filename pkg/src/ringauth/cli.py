"""Command-line interface: benchmark subcommands and scenario runs."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bench, sim
from .errors import ScenarioError
from .pairing import DEFAULT_PROFILE, PROFILES


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--curve", default=DEFAULT_PROFILE, help="curve profile name")
    parser.add_argument("--trials", type=int, default=100, help="timed trials per cell")
    parser.add_argument("--seed", type=int, default=1, help="deterministic input seed")
    parser.add_argument("--csv", type=Path, default=None, help="write CSV here instead of stdout")
    parser.add_argument("--gnuplot", action="store_true", help="emit gnuplot-ready columns")
    parser.add_argument(
        "--pin-cpu", action="store_true", help="pin the measurement thread to one cpu"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringauth",
        description="Ring-signature vehicular authentication: benchmarks and simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench_cmd = sub.add_parser("bench", help="performance measurements")
    bench_sub = bench_cmd.add_subparsers(dest="bench_command", required=True)

    ops = bench_sub.add_parser("ops", help="per-operation timings")
    _add_common(ops)

    vvr = bench_sub.add_parser("verify-vs-ringsize", help="verification latency vs ring size")
    _add_common(vvr)
    vvr.add_argument("--ring-sizes", type=_int_list, default=[2, 4, 8, 12, 16])

    batch = bench_sub.add_parser("batch-curve", help="single vs batched verification vs batch size")
    _add_common(batch)
    batch.add_argument("--eta-list", type=_int_list, default=[1, 10, 50, 100, 500])
    batch.add_argument("--ring-size", type=int, default=2)

    sizes = bench_sub.add_parser("sizes", help="serialized sizes per profile")
    _add_common(sizes)
    sizes.add_argument("--ring-size", type=int, default=2)
    sizes.add_argument(
        "--all-profiles", action="store_true", help="report every registered profile"
    )

    sim_cmd = sub.add_parser("sim", help="deterministic protocol simulation")
    sim_sub = sim_cmd.add_subparsers(dest="sim_command", required=True)
    run = sim_sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario", type=Path, help="scenario JSON file")
    run.add_argument("--log", type=Path, default=None, help="write the JSONL event log here")
    run.add_argument("--csv", type=Path, default=None, help="write the CSV summary here")
    run.add_argument("--print-hash", action="store_true", help="print the log digest")

    return parser


def _emit(rows: list[dict], args) -> None:
    text = bench.rows_to_csv(rows, gnuplot=args.gnuplot)
    header = f"# machine: {bench.machine_descriptor()}\n# profile: {args.curve}\n"
    out = header + text if args.gnuplot else text
    if args.csv:
        args.csv.write_text(out)
    else:
        sys.stdout.write(out)


def _check_profile(parser: argparse.ArgumentParser, name: str, needs_backend: bool) -> None:
    if name not in PROFILES:
        parser.error(f"unknown curve profile {name!r} (known: {', '.join(sorted(PROFILES))})")
    if needs_backend and not PROFILES[name].has_backend:
        parser.error(f"profile {name!r} has no arithmetic backend; size reports only")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if getattr(args, "pin_cpu", False) and hasattr(os, "sched_setaffinity"):
        os.sched_setaffinity(0, {min(os.sched_getaffinity(0))})

    if args.command == "bench":
        if args.bench_command == "ops":
            _check_profile(parser, args.curve, True)
            _emit(bench.bench_ops(args.curve, args.trials, args.seed), args)
        elif args.bench_command == "verify-vs-ringsize":
            _check_profile(parser, args.curve, True)
            _emit(
                bench.bench_verify_vs_ringsize(args.curve, args.ring_sizes, args.trials, args.seed),
                args,
            )
        elif args.bench_command == "batch-curve":
            _check_profile(parser, args.curve, True)
            _emit(
                bench.bench_batch(args.curve, args.eta_list, args.ring_size, args.trials, args.seed),
                args,
            )
        elif args.bench_command == "sizes":
            _check_profile(parser, args.curve, False)
            names = sorted(PROFILES) if args.all_profiles else [args.curve]
            _emit(bench.bench_sizes(names, args.ring_size), args)
        return 0

    if args.command == "sim":
        try:
            scenario = sim.Scenario.from_json(args.scenario.read_text())
        except (OSError, ScenarioError) as exc:
            parser.error(str(exc))
        log = sim.run_scenario(scenario)
        if args.log:
            args.log.write_text(log.to_jsonl())
        if args.csv:
            args.csv.write_text(log.summary_csv())
        if not args.log and not args.csv:
            sys.stdout.write(log.summary_csv())
        if args.print_hash:
            sys.stdout.write(f"log-sha256: {log.digest()}\n")
        return 0

    return 0


if __name__ == "__main__":
    sys.exit(main())
