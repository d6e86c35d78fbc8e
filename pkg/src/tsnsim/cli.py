"""Command line: ``tsnsim run`` and ``tsnsim validate``."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import ContractError, TopologyError
from .metrics import report_json
from .scenario import Scenario, ScenarioError, load_scenario, resolve_scenario_path
from .sim import run
from .timebase import parse_duration

log = logging.getLogger("tsnsim")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


def _seed_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if not sep or b < a:
        raise argparse.ArgumentTypeError(f"expected A..B with A <= B, got {text!r}")
    return range(a, b + 1)


def _duration(text: str) -> int:
    try:
        return parse_duration(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsnsim", description="gPTP / 5G-TSN time synchronization simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write a trace or report")
    r.add_argument("--scenario", required=True, help="scenario JSON file (bare names also search the shipped set)")
    seeds = r.add_mutually_exclusive_group()
    seeds.add_argument("--seed", type=int, help="override the scenario seed")
    seeds.add_argument("--seeds", type=_seed_range, metavar="A..B", help="batch over seeds A..B inclusive")
    r.add_argument("--out", help="output file; with --seeds an output directory (default: stdout)")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.add_argument("--duration", type=_duration, help="override the simulated duration, e.g. 10s")
    r.add_argument("--jobs", type=int, default=1, help="parallel worker processes for --seeds")

    v = sub.add_parser("validate", help="parse and validate a scenario")
    v.add_argument("--scenario", required=True)
    return parser


def render(scenario: Scenario, seed: int, fmt: str) -> str:
    trace = run(scenario, seed=seed)
    return trace.to_csv() if fmt == "csv" else report_json(trace)


def _run_one(args: tuple[Scenario, int, str, str]) -> str:
    scenario, seed, fmt, path = args
    Path(path).write_text(render(scenario, seed, fmt), encoding="utf-8")
    return path


def _load(path: str) -> Scenario:
    try:
        resolve_scenario_path(path)
    except FileNotFoundError as exc:
        raise _UsageError(str(exc)) from None
    return load_scenario(path)


def cmd_validate(args) -> int:
    sc = _load(args.scenario)
    print(f"ok: {sc.name or args.scenario} ({len(sc.nodes)} nodes, {len(sc.links)} links)")
    return EXIT_OK


def cmd_run(args) -> int:
    sc = _load(args.scenario)
    if args.duration is not None:
        sc = replace(sc, duration=args.duration)
    if args.seeds is None:
        seed = sc.seed if args.seed is None else args.seed
        text = render(sc, seed, args.format)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return EXIT_OK

    if not args.out:
        raise _UsageError("--seeds needs --out <directory>")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = sc.name or Path(args.scenario).stem
    jobs = [(sc, s, args.format, str(out / f"{stem}_seed{s}.{args.format}")) for s in args.seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            written = list(pool.map(_run_one, jobs))
    else:
        written = [_run_one(j) for j in jobs]
    log.info("wrote %d files to %s", len(written), out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = cmd_run if args.command == "run" else cmd_validate
    try:
        return handler(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"tsnsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioError, TopologyError, ContractError, OSError) as exc:
        print(f"tsnsim: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
