"""Result bundle I/O: records table, summary document, and plot-ready report tables.

The records table is delimited text with one row per iteration; the summary is
a JSON document whose statistics can be recomputed bit-for-bit from the
records.  All numbers are written with ``repr`` so they survive a round trip
through parsing, independent of locale.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .engine import (
    CriticalityIndex,
    PercentileSummary,
    Scenario,
    SimulationRecord,
    criticality,
    percentiles,
)
from .objectives import OBJECTIVE_UNITS
from .sampling import ValidationError

RECORDS_NAME = "records.csv"
SUMMARY_NAME = "summary.json"

#: Points sampled from each preference curve for the report tables.
CURVE_SAMPLES = 200


def _fmt(value: float) -> str:
    return repr(float(value))


def write_records(
    directory: str | Path, scenario: Scenario, records: Sequence[SimulationRecord]
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / RECORDS_NAME
    objective_names = scenario.objective_names
    header = (
        ["iteration"]
        + [f"x_{name}" for name in scenario.variable_names]
        + [f"obj_{name}" for name in objective_names]
        + ["score", "unmitigated_duration", "reductions", "critical_path"]
    )
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for record in records:
            reductions = ";".join(
                f"{mid}:{_fmt(value)}"
                for mid, value in sorted(record.reductions.items())
                if value > 0.0
            )
            writer.writerow(
                [record.iteration]
                + [int(v) for v in record.decision]
                + [_fmt(record.objectives[name]) for name in objective_names]
                + [
                    _fmt(record.score),
                    "" if record.unmitigated_duration is None
                    else _fmt(record.unmitigated_duration),
                    reductions,
                    ";".join(str(a) for a in record.critical),
                ]
            )
    return path


def read_records(path: str | Path) -> tuple[list[str], list[str], list[SimulationRecord]]:
    """Parse a records table back into records plus its variable/objective names."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: records table is empty") from None
        variables = [c[2:] for c in header if c.startswith("x_")]
        objectives = [c[4:] for c in header if c.startswith("obj_")]
        expected = (
            ["iteration"]
            + [f"x_{v}" for v in variables]
            + [f"obj_{o}" for o in objectives]
            + ["score", "unmitigated_duration", "reductions", "critical_path"]
        )
        if header != expected:
            raise ValidationError(f"{path}: malformed records header {header!r}")
        records = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValidationError(f"{path}: row {line} has {len(row)} fields")
            try:
                records.append(_parse_row(row, variables, objectives))
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"{path}: row {line}: {exc}") from exc
    return variables, objectives, records


def _parse_row(
    row: list[str], variables: list[str], objectives: list[str]
) -> SimulationRecord:
    pos = 1
    decision = tuple(int(v) for v in row[pos : pos + len(variables)])
    pos += len(variables)
    values = {
        name: float(raw) for name, raw in zip(objectives, row[pos : pos + len(objectives)])
    }
    pos += len(objectives)
    score, unmitigated, reductions_raw, critical_raw = row[pos : pos + 4]
    reductions = {}
    if reductions_raw:
        for item in reductions_raw.split(";"):
            key, value = item.split(":")
            reductions[int(key)] = float(value)
    return SimulationRecord(
        iteration=int(row[0]),
        decision=decision,
        objectives=values,
        score=float(score),
        unmitigated_duration=None if unmitigated == "" else float(unmitigated),
        reductions=reductions,
        critical=tuple(int(a) for a in critical_raw.split(";")) if critical_raw else (),
    )


def build_summary(
    scenario: Scenario,
    mode: str,
    records: Sequence[SimulationRecord],
    top_k: int = 20,
) -> dict:
    stats = percentiles(records, scenario.percentile_levels)
    crit = criticality(records, scenario.variable_names)
    resolved = scenario.resolve_mode(mode)
    penalties = [
        {"target_duration": p.target, "rate_per_day": p.rate_per_day}
        for p in resolved.penalties
    ]
    curves = {}
    for criterion in scenario.model.criteria:
        curves.setdefault(
            criterion.objective,
            {"x": list(criterion.curve.knots_x), "y": list(criterion.curve.knots_y)},
        )
    summary = {
        "schema": 1,
        "generator": {"package": "planopt", "version": __version__},
        "scenario": {
            "name": scenario.name,
            "kind": scenario.kind,
            "warnings": list(scenario.warnings),
        },
        "run": {
            "mode": mode,
            "iterations": len(records),
            "seed": scenario.seed,
            "percentile_levels": list(stats.levels),
            "soo_penalties": penalties,
        },
        "objectives": {
            name: {"unit": OBJECTIVE_UNITS.get(name, "")}
            for name in scenario.objective_names
        },
        "percentiles": {
            objective: {_fmt(level): value for level, value in levels.items()}
            for objective, levels in stats.values.items()
        },
        "criticality": {
            "variables": {
                name: {str(value): fraction for value, fraction in bucket.items()}
                for name, bucket in crit.variable_values.items()
            },
            "top_combinations": [
                {"decision": list(combo), "fraction": fraction}
                for combo, fraction in crit.top(top_k)
            ],
            "distinct_combinations": len(crit.combinations),
        },
        "curves": curves,
    }
    if scenario.kind == "control":
        no_delay = sum(
            1
            for r in records
            if r.unmitigated_duration is not None
            and r.unmitigated_duration <= scenario.control_params.target_duration
        )
        summary["run"]["no_delay_iterations"] = no_delay
        summary["run"]["target_duration"] = scenario.control_params.target_duration
    return summary


def write_summary(directory: str | Path, summary: dict) -> Path:
    path = Path(directory) / SUMMARY_NAME
    path.write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path


def read_summary(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def report_tables(
    variables: Sequence[str],
    objectives: Sequence[str],
    records: Sequence[SimulationRecord],
    summary: dict | None,
    top_k: int = 10,
) -> dict[str, list[list]]:
    """Plot-ready delimited tables recomputed from the records.

    Emits per-variable frequencies, the top-K decision combinations,
    recomputed percentiles, empirical CDF samples per objective, and (when the
    sibling summary provides curve knots) preference-curve samples with
    percentile markers.
    """
    crit = criticality(records, variables)
    kind = (summary or {}).get("scenario", {}).get("kind")
    binary = kind == "control" or all(
        value in (0, 1) for r in records for value in r.decision
    )

    tables: dict[str, list[list]] = {}
    freq_rows: list[list] = [["variable", "value", "fraction"]]
    for name in variables:
        bucket = crit.variable_values[name]
        if binary:
            freq_rows.append([name, 1, _fmt(bucket.get(1, 0.0))])
        else:
            for value, fraction in bucket.items():
                freq_rows.append([name, value, _fmt(fraction)])
    tables["variable_frequency"] = freq_rows

    combo_rows: list[list] = [["rank", "decision", "fraction"]]
    for rank, (combo, fraction) in enumerate(crit.top(top_k), start=1):
        if binary:
            label = "+".join(
                name for name, value in zip(variables, combo) if value
            ) or "none"
        else:
            label = ",".join(str(v) for v in combo)
        combo_rows.append([rank, label, _fmt(fraction)])
    tables["combinations"] = combo_rows

    levels = None
    if summary is not None:
        levels = [float(v) for v in summary["run"]["percentile_levels"]]
    stats = percentiles(records, levels or (50.0, 80.0, 90.0))
    pct_rows: list[list] = [["objective", "level", "value"]]
    for objective in objectives:
        for level in stats.levels:
            pct_rows.append([objective, _fmt(level), _fmt(stats.value(objective, level))])
    tables["percentiles"] = pct_rows

    for objective in objectives:
        data = np.sort(np.array([r.objectives[objective] for r in records]))
        n = len(data)
        rows: list[list] = [["value", "cumulative_probability"]]
        for i, value in enumerate(data, start=1):
            rows.append([_fmt(value), _fmt(i / n)])
        tables[f"cdf_{objective}"] = rows

    if summary is not None and "curves" in summary:
        marker_rows: list[list] = [["objective", "level", "value", "preference"]]
        for objective, knots in summary["curves"].items():
            xs = np.array(knots["x"], dtype=float)
            ys = np.array(knots["y"], dtype=float)
            sample_x = np.linspace(xs[0], xs[-1], CURVE_SAMPLES)
            sample_y = np.interp(sample_x, xs, ys)
            rows = [["value", "preference"]]
            rows.extend([_fmt(x), _fmt(y)] for x, y in zip(sample_x, sample_y))
            tables[f"curve_{objective}"] = rows
            if objective in stats.values:
                for level in stats.levels:
                    value = stats.value(objective, level)
                    pref = float(np.interp(value, xs, ys))
                    if value < xs[0] or value > xs[-1]:
                        pref = 0.0
                    marker_rows.append(
                        [objective, _fmt(level), _fmt(value), _fmt(pref)]
                    )
        tables["curve_markers"] = marker_rows
    return tables


def write_tables(directory: str | Path, tables: dict[str, list[list]]) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in tables.items():
        path = directory / f"{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as handle:
            csv.writer(handle).writerows(rows)
        written.append(path)
    return written
