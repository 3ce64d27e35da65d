"""Command-line driver.

Subcommands: validate (lint a network file), solve (one interval),
sweep (a full 96-slot day), report (re-bin stored per-branch detail
files), benchmark (materialize the bundled campus fixture and run its
scenario set). Exit status: 0 success, 1 diagnostics (bad input or
usage), 2 solver divergence in a requested interval.

The simulator itself uses no randomness; output bytes depend only on
the inputs.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import benchmark as benchmark_fixture
from .congestion import CongestionHistogram, bin_loadings, congested_elements
from .fileio import (
    GridFileError,
    detail_csv_for_solution,
    emit_network_file,
    emit_profile_csv,
    emit_report_csv,
    emit_report_json,
    emit_scenario_file,
    parse_branch_detail_csv,
    parse_network_file,
    parse_profile_csv,
    parse_scenario_file,
)
from .network import Network
from .powerflow import PowerFlowSolution, solve_newton_raphson
from .scenario import SLOTS_PER_DAY, LoadProfile, Scenario, build_injections, run_sweep

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_DIVERGED = 2

REPORT_FORMATS = ("csv", "json-text")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as diagnostics (exit 1)."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{message}\n{self.format_usage()}")


@dataclass(frozen=True)
class RunConfig:
    """Resolved inputs for a solve or sweep run."""

    network_path: Path
    scenario_path: Path
    profiles_dir: Path
    interval: int | None          # None means the full day
    out_dir: Path | None
    report_format: str

    def __post_init__(self) -> None:
        if self.interval is not None and not 0 <= self.interval < SLOTS_PER_DAY:
            raise _UsageError(
                f"--interval must be in [0, {SLOTS_PER_DAY - 1}], got {self.interval}")


def _add_run_arguments(parser: argparse.ArgumentParser, interval_default: int | None) -> None:
    parser.add_argument("--network", required=True, help="network JSON file")
    parser.add_argument("--scenario", required=True, help="scenario JSON file")
    parser.add_argument("--profiles", required=True, help="directory of profile CSV files")
    if interval_default is not None:
        parser.add_argument("--interval", type=int, default=interval_default,
                            help="15-minute slot index 0-95 (default: %(default)s, 09:00)")
    parser.add_argument("--out", default=None, help="directory for report files")
    parser.add_argument("--format", choices=REPORT_FORMATS, default="csv",
                        help="summary report format (default: %(default)s)")


def _build_arg_parser() -> _Parser:
    parser = _Parser(prog="gridstress",
                     description="Distribution-grid stress studies for EV charging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="lint a network file")
    p_validate.add_argument("--network", required=True)

    # 09:00 is slot 36: the busiest charging hour, when most vehicles
    # have arrived.
    p_solve = sub.add_parser("solve", help="solve one interval and print loadings")
    _add_run_arguments(p_solve, interval_default=36)

    p_sweep = sub.add_parser("sweep", help="run all 96 intervals of a scenario")
    _add_run_arguments(p_sweep, interval_default=None)

    p_report = sub.add_parser("report", help="bin stored per-branch detail files")
    p_report.add_argument("details", nargs="+", help="detail CSV files to re-bin")
    p_report.add_argument("--out", default=None)
    p_report.add_argument("--format", choices=REPORT_FORMATS, default="csv")

    p_bench = sub.add_parser("benchmark",
                             help="write the bundled campus fixture and run its scenarios")
    p_bench.add_argument("--out", required=True, help="directory for fixture and reports")
    p_bench.add_argument("--interval", type=int, default=36)
    p_bench.add_argument("--format", choices=REPORT_FORMATS, default="csv")

    return parser


def _load_inputs(args: argparse.Namespace) -> tuple[Network, Scenario, dict[str, LoadProfile]]:
    net = parse_network_file(Path(args.network).read_text())
    scenario = parse_scenario_file(Path(args.scenario).read_text())
    profiles_dir = Path(args.profiles)
    if not profiles_dir.is_dir():
        raise GridFileError([f"profiles directory not found: {profiles_dir}"])
    profiles: dict[str, LoadProfile] = {}
    for path in sorted(profiles_dir.glob("*.csv")):
        profiles[path.stem] = parse_profile_csv(path.read_text(), path.stem)
    return net, scenario, profiles


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _emit_summary(rows: list[tuple[str, CongestionHistogram]], fmt: str) -> str:
    return emit_report_csv(rows) if fmt == "csv" else emit_report_json(rows)


def _summary_filename(fmt: str) -> str:
    return "report.csv" if fmt == "csv" else "report.json"


def _print_solution(name: str, interval: int, solution: PowerFlowSolution,
                    s_base_mva: float) -> None:
    status = "converged" if solution.converged else "DIVERGED"
    vmin, vmax = solution.voltage_range()
    hist = bin_loadings(solution.loading_by_branch())
    print(f"{name} slot {interval}: {status} in {solution.iterations} iterations, "
          f"slack {solution.slack_injection.real * s_base_mva:.3f} MW "
          f"({solution.slack_injection.real:.4f} pu)")
    print(f"  voltage band: {vmin:.4f} - {vmax:.4f} pu")
    print(f"  loading bins: <40%: {hist.below_40}  40-80: {hist.bin_40_80}  "
          f"80-100: {hist.bin_80_100}  100-150: {hist.bin_100_150}  >150: {hist.bin_gt_150}")
    worst = congested_elements(solution, 80.0)[:5]
    for branch_id, loading in worst:
        print(f"    {loading:7.1f}%  {branch_id}")


def _cmd_validate(args: argparse.Namespace) -> int:
    text = Path(args.network).read_text()
    try:
        parse_network_file(text)
    except GridFileError as exc:
        for diagnostic in exc.diagnostics:
            print(diagnostic, file=sys.stderr)
        return EXIT_DIAGNOSTICS
    print(f"{args.network}: OK")
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace) -> int:
    config = RunConfig(Path(args.network), Path(args.scenario), Path(args.profiles),
                       args.interval, Path(args.out) if args.out else None, args.format)
    net, scenario, profiles = _load_inputs(args)
    injections = build_injections(net, scenario, profiles, config.interval)
    solution = solve_newton_raphson(net, injections)
    _print_solution(scenario.name, config.interval, solution, net.s_base_mva)

    if config.out_dir is not None:
        hist = bin_loadings(solution.loading_by_branch())
        _write(config.out_dir / _summary_filename(config.report_format),
               _emit_summary([(scenario.name, hist)], config.report_format))
        _write(config.out_dir / f"detail_{scenario.name}_slot{config.interval:02d}.csv",
               detail_csv_for_solution(solution))
    return EXIT_OK if solution.converged else EXIT_DIVERGED


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = RunConfig(Path(args.network), Path(args.scenario), Path(args.profiles),
                       None, Path(args.out) if args.out else None, args.format)
    net, scenario, profiles = _load_inputs(args)
    result = run_sweep(net, scenario, profiles)

    status_lines = ["interval,converged,iterations,max_loading_percent,branches_ge_100"]
    for record in result.records:
        loadings = record.solution.loading_by_branch().values()
        over = sum(1 for v in loadings if v >= 100.0)
        status_lines.append(f"{record.interval},{int(record.solution.converged)},"
                            f"{record.solution.iterations},{max(loadings):.6f},{over}")
    status_csv = "\n".join(status_lines) + "\n"

    diverged = result.diverged_intervals()
    print(f"{scenario.name}: {len(result.records)} intervals, "
          f"{len(diverged)} diverged")
    ledger = result.ledger
    print(f"  EV energy kWh: demanded {float(ledger.demanded_kwh):.1f}, "
          f"served {float(ledger.served_kwh):.1f}, unserved {float(ledger.unserved_kwh):.1f}")

    if config.out_dir is not None:
        _write(config.out_dir / f"sweep_{scenario.name}.csv", status_csv)
        for record in result.records:
            _write(config.out_dir / "details"
                   / f"{scenario.name}_slot{record.interval:02d}.csv",
                   detail_csv_for_solution(record.solution))
    return EXIT_DIVERGED if diverged else EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    rows: list[tuple[str, CongestionHistogram]] = []
    for path_text in args.details:
        path = Path(path_text)
        detail = parse_branch_detail_csv(path.read_text())
        hist = bin_loadings({branch: loading for branch, (_, loading, _) in detail.items()})
        rows.append((path.stem, hist))
    summary = _emit_summary(rows, args.format)
    print(summary, end="")
    if args.out:
        _write(Path(args.out) / _summary_filename(args.format), summary)
    return EXIT_OK


def _cmd_benchmark(args: argparse.Namespace) -> int:
    if not 0 <= args.interval < SLOTS_PER_DAY:
        raise _UsageError(f"--interval must be in [0, {SLOTS_PER_DAY - 1}]")
    out_dir = Path(args.out)
    bundle = benchmark_fixture.build_benchmark()

    _write(out_dir / "network.json", emit_network_file(bundle.network))
    for profile in bundle.profiles.values():
        _write(out_dir / "profiles" / f"{profile.id}.csv", emit_profile_csv(profile))
    for scenario in bundle.scenarios:
        _write(out_dir / "scenarios" / f"{scenario.name}.json", emit_scenario_file(scenario))

    rows: list[tuple[str, CongestionHistogram]] = []
    diverged = False
    for scenario in bundle.scenarios:
        result = run_sweep(bundle.network, scenario, bundle.profiles,
                           intervals=[args.interval])
        record = result.records[0]
        diverged = diverged or not record.solution.converged
        _print_solution(scenario.name, args.interval, record.solution,
                        bundle.network.s_base_mva)
        rows.append((scenario.name, bin_loadings(record.solution.loading_by_branch())))
        _write(out_dir / "details" / f"{scenario.name}_slot{args.interval:02d}.csv",
               detail_csv_for_solution(record.solution))

    _write(out_dir / _summary_filename(args.format), _emit_summary(rows, args.format))
    print(f"fixture and reports written to {out_dir}")
    return EXIT_DIVERGED if diverged else EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
    "benchmark": _cmd_benchmark,
}


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = _build_arg_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except GridFileError as exc:
        for diagnostic in exc.diagnostics:
            print(diagnostic, file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS


def main() -> None:
    sys.exit(cli_main())
