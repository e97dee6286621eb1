"""Command-line interface: validate scenario files, run studies, emit report tables.

Exit codes are stable: 0 on success, 1 for validation problems (including
parse failures), 2 for runtime failures.  ``PLANOPT_OUT`` sets the default
output directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .engine import run as run_engine
from .offshore import InfeasibleError
from .optimizer import InfeasibleSearchError
from .results import (
    RECORDS_NAME,
    SUMMARY_NAME,
    build_summary,
    read_records,
    read_summary,
    report_tables,
    write_records,
    write_summary,
    write_tables,
)
from .sampling import ValidationError
from .scenario_io import load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

ENV_OUT = "PLANOPT_OUT"


def _default_out(name: str) -> Path:
    base = os.environ.get(ENV_OUT)
    return Path(base) / name if base else Path(name)


def _print_report(report) -> None:
    for warning in report.warnings:
        print(f"warning: {warning}")
    for error in report.errors:
        print(f"error: {error}")


def cmd_validate(args: argparse.Namespace) -> int:
    scenario, report = load_scenario(args.scenario)
    _print_report(report)
    if scenario is None or not report.ok:
        print(f"{args.scenario}: INVALID ({len(report.errors)} error(s))")
        return EXIT_VALIDATION
    print(
        f"{args.scenario}: OK ({scenario.kind} scenario "
        f"{scenario.name!r}, {len(report.warnings)} warning(s))"
    )
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    scenario, report = load_scenario(args.scenario)
    _print_report(report)
    if scenario is None or not report.ok:
        return EXIT_VALIDATION
    if args.iterations is not None:
        scenario.iterations = args.iterations
    if args.seed is not None:
        scenario.seed = args.seed
    if args.percentiles:
        try:
            scenario.percentile_levels = tuple(
                float(v) for v in args.percentiles.split(",")
            )
        except ValueError:
            print(f"error: cannot parse percentile list {args.percentiles!r}")
            return EXIT_VALIDATION
    try:
        scenario.resolve_mode(args.mode)
    except ValidationError as exc:
        print(f"error: {exc}")
        return EXIT_VALIDATION

    out = Path(args.out) if args.out else _default_out(f"{scenario.name}-{args.mode.replace(':', '-')}")
    try:
        records = run_engine(scenario, mode=args.mode, workers=args.workers)
    except (InfeasibleError, InfeasibleSearchError, RuntimeError) as exc:
        print(f"error: {exc}")
        return EXIT_RUNTIME
    records_path = write_records(out, scenario, records)
    summary = build_summary(scenario, args.mode, records, top_k=args.top_k)
    summary_path = write_summary(out, summary)
    print(f"wrote {records_path}")
    print(f"wrote {summary_path}")
    for objective, levels in summary["percentiles"].items():
        rendered = ", ".join(f"P{float(k):g}={v:.6g}" for k, v in sorted(
            levels.items(), key=lambda item: float(item[0])
        ))
        print(f"{objective}: {rendered}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    records_path = Path(args.records)
    try:
        variables, objectives, records = read_records(records_path)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}")
        return EXIT_RUNTIME
    summary = None
    summary_path = records_path.parent / SUMMARY_NAME
    if summary_path.exists():
        summary = read_summary(summary_path)
    out = Path(args.out) if args.out else records_path.parent / "report"
    try:
        tables = report_tables(variables, objectives, records, summary, top_k=args.top_k)
    except ValidationError as exc:
        print(f"error: {exc}")
        return EXIT_RUNTIME
    for path in write_tables(out, tables):
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planopt",
        description=(
            "Monte-Carlo project planning and mitigation-control optimization "
            "driven by aggregated stakeholder preferences."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a scenario file")
    p_validate.add_argument("scenario", help="path to the scenario YAML file")
    p_validate.set_defaults(func=cmd_validate)

    p_run = sub.add_parser("run", help="run a simulation-and-optimization study")
    p_run.add_argument("scenario", help="path to the scenario YAML file")
    p_run.add_argument(
        "--mode",
        default="moo",
        help="'moo' (aggregated preferences) or 'soo:<objective>' (default: moo)",
    )
    p_run.add_argument("--iterations", type=int, help="override the iteration count")
    p_run.add_argument("--seed", type=int, help="override the master seed")
    p_run.add_argument(
        "--percentiles", help="comma-separated percentile levels, e.g. 50,80,90"
    )
    p_run.add_argument("--out", help=f"output directory (default: ${ENV_OUT} or ./<name>-<mode>)")
    p_run.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p_run.add_argument("--top-k", type=int, default=20, help="combinations kept in the summary")
    p_run.set_defaults(func=cmd_run)

    p_report = sub.add_parser("report", help="emit plot-ready tables from a records file")
    p_report.add_argument("records", help=f"path to a {RECORDS_NAME} file")
    p_report.add_argument("--top-k", type=int, default=10, help="combination rows to emit")
    p_report.add_argument("--out", help="output directory (default: <records dir>/report)")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
