"""Scenario file loading and validation.

Scenario files are versioned YAML documents.  Currency amounts are stored as
integer minor units (cents) and converted to whole units internally, so golden
files stay drift-free.  Loading is report-carrying: structural problems are
accumulated with their section paths instead of failing on the first issue,
and recoverable data slips (unordered three-point triples) are auto-sorted
with a warning.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Callable

import yaml

from .engine import KIND_CONTROL, KIND_PLANNING, DEFAULT_PERCENTILES, Scenario
from .network import (
    Activity,
    ProjectNetwork,
    RiskEvent,
    SharedUncertaintyFactor,
    ValidationReport,
)
from .objectives import OBJECTIVE_UNITS, ControlMeasure, ControlObjectiveParams
from .offshore import OffshoreParams, OperationRisk, VesselSpec
from .optimizer import DecisionSpace, DelayPenalty, GaConfig, OptimizationMode
from .preference import Criterion, PreferenceCurve, PreferenceModel, WeightScheme
from .sampling import (
    ThreePointEstimate,
    UNIT_CURRENCY,
    UNIT_DAYS,
    UNIT_POINTS,
    ValidationError,
)

SCHEMA_VERSION = 1

#: Objectives whose values are currency (file fields in cents).
CURRENCY_OBJECTIVES = frozenset(
    name for name, unit in OBJECTIVE_UNITS.items() if unit == "EUR"
)


class ScenarioFileError(ValidationError):
    """The scenario file cannot be parsed or fails validation."""


class _Loader:
    def __init__(self) -> None:
        self.report = ValidationReport()

    def error(self, path: str, message: str) -> None:
        self.report.errors.append(f"{path}: {message}")

    def warn(self, path: str, message: str) -> None:
        self.report.warnings.append(f"{path}: {message}")

    def triple(
        self, raw: Any, path: str, unit: str = UNIT_DAYS
    ) -> ThreePointEstimate | None:
        if not isinstance(raw, (list, tuple)) or len(raw) != 3:
            self.error(path, f"expected [optimistic, most-likely, pessimistic], got {raw!r}")
            return None
        try:
            values = [float(v) for v in raw]
        except (TypeError, ValueError):
            self.error(path, f"non-numeric three-point estimate {raw!r}")
            return None
        estimate, sorted_ = ThreePointEstimate.from_unsorted(*values, unit=unit)
        if sorted_:
            self.warn(
                path,
                f"triple {tuple(values)} violates optimistic <= most-likely <= "
                f"pessimistic; auto-sorted to "
                f"({estimate.optimistic}, {estimate.most_likely}, {estimate.pessimistic})",
            )
        return estimate

    def money_triple(self, raw: Any, path: str) -> ThreePointEstimate | None:
        if not isinstance(raw, (list, tuple)) or len(raw) != 3:
            self.error(path, f"expected three integer cent amounts, got {raw!r}")
            return None
        cents = []
        for v in raw:
            if not isinstance(v, int):
                self.error(path, f"currency amounts must be integer cents, got {v!r}")
                return None
            cents.append(v)
        estimate, sorted_ = ThreePointEstimate.from_unsorted(
            *(c / 100.0 for c in cents), unit=UNIT_CURRENCY
        )
        if sorted_:
            self.warn(path, f"currency triple {tuple(cents)} auto-sorted ascending")
        return estimate

    def money(self, raw: Any, path: str, default: int | None = None) -> float | None:
        if raw is None:
            if default is None:
                self.error(path, "missing currency amount")
                return None
            raw = default
        if not isinstance(raw, int):
            self.error(path, f"currency amounts must be integer cents, got {raw!r}")
            return None
        return raw / 100.0

    def require(self, mapping: Any, key: str, path: str) -> Any:
        if not isinstance(mapping, dict) or key not in mapping:
            self.error(path, f"missing required key {key!r}")
            return None
        return mapping[key]


def load_scenario(path: str | Path) -> tuple[Scenario | None, ValidationReport]:
    """Parse and validate a scenario file.

    Returns the scenario (None when errors prevent construction) together with
    the full validation report.
    """
    loader = _Loader()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        loader.error(str(path), f"cannot read file: {exc}")
        return None, loader.report
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        loader.error(str(path), f"YAML parse failure{where}: {exc}")
        return None, loader.report
    if not isinstance(doc, dict):
        loader.error(str(path), "scenario document must be a mapping")
        return None, loader.report

    meta = doc.get("meta", {})
    schema = meta.get("schema")
    if schema != SCHEMA_VERSION:
        loader.error("meta.schema", f"unrecognized schema version {schema!r}")
        return None, loader.report
    kind = meta.get("kind")
    if kind not in (KIND_PLANNING, KIND_CONTROL):
        loader.error("meta.kind", f"expected 'planning' or 'control', got {kind!r}")
        return None, loader.report
    name = str(meta.get("name", path.stem))

    mcs = doc.get("mcs", {})
    iterations = _int(loader, mcs.get("iterations", 1000), "mcs.iterations", minimum=1)
    seed = _int(loader, mcs.get("seed", 0), "mcs.seed", minimum=0)
    percentile_levels = tuple(
        float(v) for v in mcs.get("percentiles", DEFAULT_PERCENTILES)
    )

    ga = _load_ga(loader, doc.get("ga", {}))

    if kind == KIND_CONTROL:
        scenario = _load_control(
            loader, doc, name, iterations, seed, percentile_levels, ga
        )
    else:
        scenario = _load_planning(
            loader, doc, name, iterations, seed, percentile_levels, ga
        )

    if scenario is not None:
        loader.report.merge(scenario.validate())
    if not loader.report.ok:
        return None, loader.report
    return scenario, loader.report


def _int(loader: _Loader, raw: Any, path: str, minimum: int | None = None) -> int:
    try:
        value = int(raw)
    except (TypeError, ValueError):
        loader.error(path, f"expected an integer, got {raw!r}")
        return minimum if minimum is not None else 0
    if minimum is not None and value < minimum:
        loader.error(path, f"value {value} below minimum {minimum}")
        return minimum
    return value


def _load_ga(loader: _Loader, section: dict) -> GaConfig:
    try:
        return GaConfig(
            population=int(section.get("population", 100)),
            generations=int(section.get("generations", 60)),
            crossover_rate=float(section.get("crossover_rate", 0.9)),
            mutation_rate=(
                None
                if section.get("mutation_rate") is None
                else float(section["mutation_rate"])
            ),
            tournament_size=int(section.get("tournament_size", 3)),
            elitism=int(section.get("elitism", 2)),
            stall_generations=int(section.get("stall_generations", 15)),
        )
    except (ValidationError, TypeError, ValueError) as exc:
        loader.error("ga", str(exc))
        return GaConfig()


def _load_model(
    loader: _Loader, doc: dict, objective_names: tuple[str, ...]
) -> PreferenceModel | None:
    curves: dict[str, PreferenceCurve] = {}
    for objective, spec in (doc.get("preferences") or {}).items():
        path = f"preferences.{objective}"
        if objective not in objective_names:
            loader.error(path, f"unknown objective; expected one of {objective_names}")
            continue
        curve = _load_curve(loader, spec, path, currency=objective in CURRENCY_OBJECTIVES)
        if curve is not None:
            curves[objective] = curve

    stakeholders = (doc.get("weights") or {}).get("stakeholders")
    if not stakeholders:
        loader.error("weights.stakeholders", "missing stakeholder weight table")
        return None
    globals_: dict[str, float] = {}
    locals_: dict[str, dict[str, float]] = {}
    for idx, entry in enumerate(stakeholders):
        path = f"weights.stakeholders[{idx}]"
        sname = entry.get("name")
        if not sname:
            loader.error(path, "stakeholder needs a name")
            continue
        globals_[sname] = float(entry.get("weight", 0.0))
        locals_[sname] = {k: float(v) for k, v in (entry.get("objectives") or {}).items()}
        for objective in locals_[sname]:
            if objective not in objective_names:
                loader.error(f"{path}.objectives", f"unknown objective {objective!r}")
    try:
        scheme = WeightScheme(stakeholders=globals_, local=locals_)
    except ValidationError as exc:
        loader.error("weights", str(exc))
        return None

    criteria = []
    for sname, objective, weight in scheme.effective():
        if objective not in curves:
            loader.error(
                f"preferences.{objective}",
                f"stakeholder {sname!r} weights objective {objective!r} "
                "but no preference curve is defined for it",
            )
            continue
        criteria.append(
            Criterion(stakeholder=sname, objective=objective, curve=curves[objective],
                      weight=weight)
        )
    try:
        return PreferenceModel(criteria)
    except ValidationError as exc:
        loader.error("weights", str(exc))
        return None


def _load_curve(
    loader: _Loader, spec: Any, path: str, currency: bool
) -> PreferenceCurve | None:
    if not isinstance(spec, dict) or "shape" not in spec:
        loader.error(path, "curve needs a 'shape' key")
        return None
    scale: Callable[[float], float] = (lambda v: v / 100.0) if currency else (lambda v: v)
    try:
        if spec["shape"] == "linear":
            knots = spec.get("knots")
            if not knots:
                loader.error(path, "linear curve needs 'knots'")
                return None
            return PreferenceCurve.linear([(scale(float(x)), float(y)) for x, y in knots])
        if spec["shape"] == "beta-pert":
            support = spec.get("support")
            if not support or len(support) != 3:
                loader.error(path, "beta-pert curve needs 'support: [low, mode, high]'")
                return None
            low, mode, high = (scale(float(v)) for v in support)
            return PreferenceCurve.beta_pert(low, mode, high)
    except (ValidationError, TypeError, ValueError) as exc:
        loader.error(path, str(exc))
        return None
    loader.error(path, f"unknown curve shape {spec['shape']!r}")
    return None


def _load_soo_modes(
    loader: _Loader, doc: dict, objective_names: tuple[str, ...], target: float | None
) -> dict[str, OptimizationMode]:
    modes: dict[str, OptimizationMode] = {}
    for objective, spec in (doc.get("soo") or {}).items():
        path = f"soo.{objective}"
        if objective not in objective_names:
            loader.error(path, f"unknown objective; expected one of {objective_names}")
            continue
        spec = spec or {}
        direction = spec.get("direction", "min")
        penalties = []
        raw_rate = spec.get("delay_penalty_per_day")
        if raw_rate is not None:
            if target is None:
                loader.error(path, "delay penalty declared but scenario has no target duration")
                continue
            if objective in CURRENCY_OBJECTIVES:
                rate = loader.money(raw_rate, f"{path}.delay_penalty_per_day")
                if rate is None:
                    continue
            else:
                rate = float(raw_rate)
            penalties.append(DelayPenalty(target=target, rate_per_day=rate))
        try:
            modes[objective] = OptimizationMode.soo(
                objective, direction=direction, penalties=penalties
            )
        except ValidationError as exc:
            loader.error(path, str(exc))
    return modes


def _load_control(
    loader: _Loader,
    doc: dict,
    name: str,
    iterations: int,
    seed: int,
    percentile_levels: tuple[float, ...],
    ga: GaConfig,
) -> Scenario | None:
    activities = []
    for idx, entry in enumerate(doc.get("activities") or []):
        path = f"activities[{idx}]"
        duration = loader.triple(loader.require(entry, "duration", path), f"{path}.duration")
        if duration is None:
            continue
        activities.append(
            Activity(
                id=_int(loader, loader.require(entry, "id", path), f"{path}.id"),
                description=str(entry.get("description", "")),
                duration=duration,
                predecessors=tuple(int(p) for p in entry.get("predecessors") or ()),
            )
        )
    if not activities:
        loader.error("activities", "control scenario needs at least one activity")
        return None

    factors = []
    for idx, entry in enumerate(doc.get("shared_factors") or []):
        path = f"shared_factors[{idx}]"
        deviation = loader.triple(
            loader.require(entry, "deviation", path), f"{path}.deviation"
        )
        if deviation is None:
            continue
        factors.append(
            SharedUncertaintyFactor(
                id=_int(loader, loader.require(entry, "id", path), f"{path}.id"),
                description=str(entry.get("description", "")),
                deviation=deviation,
                activities=tuple(int(a) for a in entry.get("activities") or ()),
            )
        )

    risks = []
    for idx, entry in enumerate(doc.get("risks") or []):
        path = f"risks[{idx}]"
        impact = loader.triple(loader.require(entry, "impact", path), f"{path}.impact")
        if impact is None:
            continue
        try:
            risks.append(
                RiskEvent(
                    id=_int(loader, loader.require(entry, "id", path), f"{path}.id"),
                    description=str(entry.get("description", "")),
                    impact=impact,
                    activities=tuple(int(a) for a in entry.get("activities") or ()),
                    probability=float(entry.get("probability", 0.0)),
                )
            )
        except ValidationError as exc:
            loader.error(path, str(exc))

    measures = []
    for idx, entry in enumerate(doc.get("measures") or []):
        path = f"measures[{idx}]"
        capacity = loader.triple(
            loader.require(entry, "capacity_days", path), f"{path}.capacity_days"
        )
        cost = loader.money_triple(
            loader.require(entry, "cost_cents", path), f"{path}.cost_cents"
        )
        nuisance = loader.triple(
            loader.require(entry, "nuisance", path), f"{path}.nuisance", unit=UNIT_POINTS
        )
        if capacity is None or cost is None or nuisance is None:
            continue
        try:
            measures.append(
                ControlMeasure(
                    id=_int(loader, loader.require(entry, "id", path), f"{path}.id"),
                    description=str(entry.get("description", "")),
                    activity=_int(
                        loader, loader.require(entry, "activity", path), f"{path}.activity"
                    ),
                    capacity=capacity,
                    cost=cost,
                    nuisance=nuisance,
                    eta=float(entry.get("eta", 0.5)),
                )
            )
        except ValidationError as exc:
            loader.error(path, str(exc))
    if not measures:
        loader.error("measures", "control scenario needs at least one measure")
        return None

    section = doc.get("objectives") or {}
    target = section.get("target_duration")
    if target is None:
        loader.error("objectives.target_duration", "missing target duration")
        return None
    try:
        params = ControlObjectiveParams(
            target_duration=float(target),
            delay_penalty_per_day=loader.money(
                section.get("delay_penalty_cents_per_day"),
                "objectives.delay_penalty_cents_per_day",
                default=0,
            )
            or 0.0,
            early_reward_per_day=loader.money(
                section.get("early_reward_cents_per_day"),
                "objectives.early_reward_cents_per_day",
                default=0,
            )
            or 0.0,
            nuisance_delay_rate=float(section.get("nuisance_delay_rate_per_day", 0.0)),
            nuisance_early_rate=float(section.get("nuisance_early_rate_per_day", 0.0)),
            nuisance_scale=float(section.get("nuisance_scale", 10.0)),
        )
    except ValidationError as exc:
        loader.error("objectives", str(exc))
        return None

    objective_names = ("duration", "cost", "nuisance")
    model = _load_model(loader, doc, objective_names)
    soo_modes = _load_soo_modes(loader, doc, objective_names, params.target_duration)
    if model is None or not loader.report.ok:
        return None

    network = ProjectNetwork(activities, risks=risks, shared_factors=factors)
    space = DecisionSpace(bounds=tuple((0, 1) for _ in measures))
    return Scenario(
        kind=KIND_CONTROL,
        name=name,
        iterations=iterations,
        seed=seed,
        ga=ga,
        model=model,
        variable_names=tuple(f"x{m.id}" for m in measures),
        space=space,
        percentile_levels=percentile_levels,
        soo_modes=soo_modes,
        network=network,
        measures=tuple(measures),
        control_params=params,
        warnings=tuple(loader.report.warnings),
    )


def _load_planning(
    loader: _Loader,
    doc: dict,
    name: str,
    iterations: int,
    seed: int,
    percentile_levels: tuple[float, ...],
    ga: GaConfig,
) -> Scenario | None:
    install_risks, bunker_risks = [], []
    for idx, entry in enumerate(doc.get("risks") or []):
        path = f"risks[{idx}]"
        impact = loader.triple(loader.require(entry, "impact", path), f"{path}.impact")
        if impact is None:
            continue
        affects = entry.get("affects")
        if affects not in ("installation", "bunkering"):
            loader.error(f"{path}.affects", "must be 'installation' or 'bunkering'")
            continue
        try:
            risk = OperationRisk(
                description=str(entry.get("description", "")),
                impact=impact,
                probability=float(entry.get("probability", 0.0)),
            )
        except ValidationError as exc:
            loader.error(path, str(exc))
            continue
        (install_risks if affects == "installation" else bunker_risks).append(risk)

    fleet = doc.get("fleet") or {}
    installation = loader.triple(
        loader.require(fleet, "installation_duration", "fleet"),
        "fleet.installation_duration",
    )
    if installation is None:
        return None
    try:
        params = OffshoreParams(
            anchors_total=_int(
                loader, loader.require(fleet, "anchors_total", "fleet"),
                "fleet.anchors_total", minimum=1,
            ),
            anchors_per_turbine=_int(
                loader, fleet.get("anchors_per_turbine", 1), "fleet.anchors_per_turbine",
                minimum=1,
            ),
            anchor_mass=float(loader.require(fleet, "anchor_mass_tonnes", "fleet") or 0),
            installation=installation,
            install_risks=tuple(install_risks),
            bunker_risks=tuple(bunker_risks),
            anchor_cost_per_tonne=loader.money(
                fleet.get("anchor_cost_per_tonne_cents"),
                "fleet.anchor_cost_per_tonne_cents",
                default=81_500,
            )
            or 0.0,
            anchor_cost_fixed=loader.money(
                fleet.get("anchor_cost_fixed_cents"),
                "fleet.anchor_cost_fixed_cents",
                default=4_000_000,
            )
            or 0.0,
        )
    except (ValidationError, TypeError) as exc:
        loader.error("fleet", str(exc))
        return None

    vessels = []
    for idx, entry in enumerate(doc.get("vessels") or []):
        path = f"vessels[{idx}]"
        bounds = entry.get("bounds")
        if not bounds or len(bounds) != 2:
            loader.error(f"{path}.bounds", "expected [lower, upper] vessel count bounds")
            continue
        bunkering = loader.triple(
            loader.require(entry, "bunkering_duration", path), f"{path}.bunkering_duration"
        )
        day_rate = loader.money(entry.get("day_rate_cents"), f"{path}.day_rate_cents")
        if bunkering is None or day_rate is None:
            continue
        try:
            vessels.append(
                VesselSpec(
                    name=str(entry.get("name", f"vessel-{idx}")),
                    min_count=int(bounds[0]),
                    max_count=int(bounds[1]),
                    deck_space=int(entry.get("deck_space", 1)),
                    day_rate=day_rate,
                    utilisation_probability=float(
                        entry.get("utilisation_probability", 1.0)
                    ),
                    emissions_per_day=float(entry.get("emissions_per_day", 0.0)),
                    bunkering=bunkering,
                )
            )
        except ValidationError as exc:
            loader.error(path, str(exc))
    if not vessels:
        loader.error("vessels", "planning scenario needs at least one vessel type")
        return None
    names = [v.name for v in vessels]
    if len(set(names)) != len(names):
        loader.error("vessels", f"vessel names must be unique, got {names}")
        return None

    objective_names = ("duration", "cost", "vessel_cost", "utilisation", "emissions")
    model = _load_model(loader, doc, objective_names)
    soo_modes = _load_soo_modes(loader, doc, objective_names, target=None)
    if model is None or not loader.report.ok:
        return None

    min_fleet = _int(
        loader,
        (doc.get("constraints") or {}).get("min_fleet_size", 1),
        "constraints.min_fleet_size",
        minimum=0,
    )
    space = DecisionSpace(
        bounds=tuple((v.min_count, v.max_count) for v in vessels), min_sum=min_fleet
    )
    return Scenario(
        kind=KIND_PLANNING,
        name=name,
        iterations=iterations,
        seed=seed,
        ga=ga,
        model=model,
        variable_names=tuple(names),
        space=space,
        percentile_levels=percentile_levels,
        soo_modes=soo_modes,
        offshore=params,
        vessels=tuple(vessels),
        warnings=tuple(loader.report.warnings),
    )
