"""Monte-Carlo loop: realize, optimize, record; then percentile and criticality statistics.

Every iteration owns an independent random stream derived from the master
seed, so results are reproducible bit for bit and independent of execution
order.  All stochastic draws of an iteration are frozen before its
optimization starts: the search sees a deterministic landscape.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .network import (
    ProjectNetwork,
    apply_measures,
    apply_measures_batch,
    completion_batch,
    forward_pass,
    realize_durations,
    validate_network,
    ValidationReport,
)
from .objectives import (
    ControlMeasure,
    ControlObjectiveParams,
    completion_deltas,
    completion_deltas_batch,
    control_cost_batch,
    control_nuisance_batch,
    offshore_objectives,
    sample_measure_impacts,
)
from .offshore import OffshoreParams, VesselSpec, simulate_fleet
from .optimizer import (
    DecisionSpace,
    GaConfig,
    OptimizationMode,
    optimize,
)
from .preference import PreferenceModel
from .sampling import RngHandle, ValidationError

KIND_PLANNING = "planning"
KIND_CONTROL = "control"

DEFAULT_PERCENTILES = (50.0, 80.0, 90.0)

# Stream-id layout: iteration in the low bits, purpose tag above, and a
# per-decision-vector index above that for evaluation substreams.
_PURPOSE_SHIFT = 40
_INDEX_SHIFT = 44
_PURPOSE_REALIZE = 0
_PURPOSE_OPTIMIZE = 1
_PURPOSE_EVALUATE = 2


def _stream_id(iteration: int, purpose: int, index: int = 0) -> int:
    return iteration + (purpose << _PURPOSE_SHIFT) + (index << _INDEX_SHIFT)


@dataclass(frozen=True)
class SimulationRecord:
    """Outcome of one Monte-Carlo iteration; the unit of all downstream statistics."""

    iteration: int
    decision: tuple[int, ...]
    objectives: dict[str, float]
    score: float
    unmitigated_duration: float | None = None
    reductions: dict[int, float] = field(default_factory=dict)
    critical: tuple[int, ...] = ()


@dataclass(frozen=True)
class PercentileSummary:
    levels: tuple[float, ...]
    values: dict[str, dict[float, float]]

    def value(self, objective: str, level: float) -> float:
        return self.values[objective][level]


@dataclass(frozen=True)
class CriticalityIndex:
    """How often each variable value, and each exact decision vector, was chosen."""

    variable_values: dict[str, dict[int, float]]
    combinations: dict[tuple[int, ...], float]

    def top(self, k: int) -> list[tuple[tuple[int, ...], float]]:
        return list(self.combinations.items())[:k]


@dataclass
class Scenario:
    """Validated, immutable description of one simulation-and-optimization study."""

    kind: str
    name: str
    iterations: int
    seed: int
    ga: GaConfig
    model: PreferenceModel
    variable_names: tuple[str, ...]
    space: DecisionSpace
    percentile_levels: tuple[float, ...] = DEFAULT_PERCENTILES
    soo_modes: dict[str, OptimizationMode] = field(default_factory=dict)
    network: ProjectNetwork | None = None
    measures: tuple[ControlMeasure, ...] = ()
    control_params: ControlObjectiveParams | None = None
    offshore: OffshoreParams | None = None
    vessels: tuple[VesselSpec, ...] = ()
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (KIND_PLANNING, KIND_CONTROL):
            raise ValidationError(f"unknown scenario kind {self.kind!r}")
        if self.iterations < 1:
            raise ValidationError("iteration count must be at least 1")
        if len(self.variable_names) != self.space.n_genes:
            raise ValidationError("variable names must match the decision space")

    @property
    def objective_names(self) -> tuple[str, ...]:
        if self.kind == KIND_CONTROL:
            return ("duration", "cost", "nuisance")
        return ("duration", "cost", "vessel_cost", "utilisation", "emissions")

    def validate(self) -> ValidationReport:
        report = ValidationReport()
        if self.kind == KIND_CONTROL:
            if self.network is None or self.control_params is None:
                report.errors.append("control scenario needs a network and objective params")
            else:
                report.merge(validate_network(self.network))
                ids = set(self.network.activity_ids)
                for measure in self.measures:
                    if measure.activity not in ids:
                        report.errors.append(
                            f"measure {measure.id} references unknown activity "
                            f"{measure.activity}"
                        )
        else:
            if self.offshore is None or not self.vessels:
                report.errors.append("planning scenario needs fleet parameters and vessels")
        for objective in self.model.objectives:
            if objective not in self.objective_names:
                report.errors.append(
                    f"preference model references unknown objective {objective!r}"
                )
        return report

    def resolve_mode(self, mode: str) -> OptimizationMode:
        """Parse a ``moo`` / ``soo:<objective>`` mode string against this scenario."""
        if mode == "moo":
            return OptimizationMode.moo()
        if mode.startswith("soo:"):
            objective = mode.split(":", 1)[1]
            if objective not in self.objective_names:
                raise ValidationError(
                    f"unknown objective {objective!r}; choose from {self.objective_names}"
                )
            if objective in self.soo_modes:
                return self.soo_modes[objective]
            return OptimizationMode.soo(objective)
        raise ValidationError(f"unknown mode {mode!r}; expected 'moo' or 'soo:<objective>'")


def run(
    scenario: Scenario,
    mode: str = "moo",
    workers: int = 1,
) -> list[SimulationRecord]:
    """Execute the full Monte-Carlo study and return one record per iteration.

    Iteration ``i`` draws from stream ``i`` of the master seed; control-case
    iterations whose unmitigated completion already meets the target record the
    empty allocation without running the optimizer.
    """
    report = scenario.validate()
    if not report.ok:
        raise ValidationError("; ".join(report.errors))
    resolved = scenario.resolve_mode(mode)
    indices = range(scenario.iterations)
    if workers <= 1:
        return [_run_iteration(scenario, resolved, i) for i in indices]
    chunks = _split(scenario.iterations, workers * 4)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [(scenario, resolved, lo, hi) for lo, hi in chunks])
        records = [record for part in parts for record in part]
    records.sort(key=lambda r: r.iteration)
    return records


def _split(n: int, parts: int) -> list[tuple[int, int]]:
    size = max(1, -(-n // parts))
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def _run_chunk(args) -> list[SimulationRecord]:
    scenario, mode, lo, hi = args
    return [_run_iteration(scenario, mode, i) for i in range(lo, hi)]


def _run_iteration(scenario: Scenario, mode: OptimizationMode, i: int) -> SimulationRecord:
    if scenario.kind == KIND_CONTROL:
        return _control_iteration(scenario, mode, i)
    return _planning_iteration(scenario, mode, i)


def _control_iteration(
    scenario: Scenario, mode: OptimizationMode, i: int
) -> SimulationRecord:
    net = scenario.network
    params = scenario.control_params
    rng = RngHandle(scenario.seed, _stream_id(i, _PURPOSE_REALIZE)).generator()
    base = realize_durations(net, rng)
    samples = sample_measure_impacts(scenario.measures, rng)
    unmitigated = forward_pass(net, base)

    if unmitigated.completion <= params.target_duration:
        zero = (0,) * len(scenario.measures)
        objectives = _control_objectives_scalar(scenario, base, zero, samples)
        return SimulationRecord(
            iteration=i,
            decision=zero,
            objectives=objectives,
            score=float("nan"),
            unmitigated_duration=unmitigated.completion,
            reductions={m.id: 0.0 for m in scenario.measures},
            critical=unmitigated.critical,
        )

    base_vector = np.array([base[aid] for aid in net.activity_ids])
    activity_columns = np.array([net.index_of(m.activity) for m in scenario.measures])
    etas = np.array([m.eta for m in scenario.measures])

    def evaluate(pop: np.ndarray) -> dict[str, np.ndarray]:
        alloc = pop.astype(float)
        durations, reductions = apply_measures_batch(
            base_vector, alloc, activity_columns, samples.capacity
        )
        completion = completion_batch(net, durations)
        d1, d2 = completion_deltas_batch(completion, params.target_duration)
        return {
            "duration": completion,
            "cost": control_cost_batch(alloc, samples, reductions, etas, d1, d2, params),
            "nuisance": control_nuisance_batch(alloc, samples, d1, d2, params),
        }

    result = optimize(
        evaluate,
        scenario.model,
        mode,
        scenario.space,
        scenario.ga,
        RngHandle(scenario.seed, _stream_id(i, _PURPOSE_OPTIMIZE)),
    )
    capacities = {m.id: samples.capacity[n] for n, m in enumerate(scenario.measures)}
    mitigated, reductions = apply_measures(base, result.vector, scenario.measures, capacities)
    realization = forward_pass(net, mitigated)
    return SimulationRecord(
        iteration=i,
        decision=result.vector,
        objectives=result.objectives,
        score=result.score,
        unmitigated_duration=unmitigated.completion,
        reductions=reductions,
        critical=realization.critical,
    )


def _control_objectives_scalar(
    scenario: Scenario,
    base: dict[int, float],
    allocations: tuple[int, ...],
    samples,
) -> dict[str, float]:
    net, params = scenario.network, scenario.control_params
    capacities = {m.id: samples.capacity[n] for n, m in enumerate(scenario.measures)}
    mitigated, reductions = apply_measures(base, allocations, scenario.measures, capacities)
    completion = forward_pass(net, mitigated).completion
    d1, d2 = completion_deltas(completion, params.target_duration)
    alloc = np.asarray(allocations, dtype=float).reshape(1, -1)
    red = np.array([[reductions[m.id] for m in scenario.measures]])
    etas = np.array([m.eta for m in scenario.measures])
    cost = control_cost_batch(
        alloc, samples, red, etas, np.array([d1]), np.array([d2]), params
    )[0]
    nuisance = control_nuisance_batch(
        alloc, samples, np.array([d1]), np.array([d2]), params
    )[0]
    return {"duration": completion, "cost": float(cost), "nuisance": float(nuisance)}


def _planning_iteration(
    scenario: Scenario, mode: OptimizationMode, i: int
) -> SimulationRecord:
    params, specs = scenario.offshore, scenario.vessels

    def simulate(x: Sequence[int]):
        stream = _stream_id(i, _PURPOSE_EVALUATE, index=_vector_index(scenario.space, x))
        rng = RngHandle(scenario.seed, stream).generator()
        return simulate_fleet(x, params, specs, rng)

    def evaluate(pop: np.ndarray) -> dict[str, np.ndarray]:
        rows = [offshore_objectives(simulate(x), x, params, specs) for x in pop]
        return {
            name: np.array([row[name] for row in rows])
            for name in scenario.objective_names
        }

    result = optimize(
        evaluate,
        scenario.model,
        mode,
        scenario.space,
        scenario.ga,
        RngHandle(scenario.seed, _stream_id(i, _PURPOSE_OPTIMIZE)),
    )
    return SimulationRecord(
        iteration=i,
        decision=result.vector,
        objectives=result.objectives,
        score=result.score,
    )


def _vector_index(space: DecisionSpace, x: Sequence[int]) -> int:
    """Mixed-radix position of a vector inside the bounded box (evaluation substreams)."""
    index = 0
    for value, (lb, ub) in zip(x, space.bounds):
        index = index * (ub - lb + 1) + (int(value) - lb)
    return index


def percentiles(
    records: Sequence[SimulationRecord],
    levels: Sequence[float] = DEFAULT_PERCENTILES,
) -> PercentileSummary:
    """Empirical quantiles per objective, linearly interpolated between order statistics."""
    if not records:
        raise ValidationError("cannot summarize an empty record list")
    levels = tuple(float(level) for level in levels)
    for level in levels:
        if not 0.0 <= level <= 100.0:
            raise ValidationError(f"percentile level {level} outside [0, 100]")
    values: dict[str, dict[float, float]] = {}
    for objective in records[0].objectives:
        data = np.array([r.objectives[objective] for r in records])
        points = np.percentile(data, levels, method="linear")
        values[objective] = {level: float(point) for level, point in zip(levels, points)}
    return PercentileSummary(levels=levels, values=values)


def criticality(
    records: Sequence[SimulationRecord],
    variable_names: Sequence[str] | None = None,
) -> CriticalityIndex:
    """Frequency of each decision-variable value and of each exact decision vector."""
    if not records:
        raise ValidationError("cannot summarize an empty record list")
    n_vars = len(records[0].decision)
    names = tuple(variable_names) if variable_names else tuple(
        f"x{k + 1}" for k in range(n_vars)
    )
    if len(names) != n_vars:
        raise ValidationError("variable name count must match the decision vectors")
    total = len(records)
    variable_values: dict[str, dict[int, float]] = {name: {} for name in names}
    combo_counts: dict[tuple[int, ...], int] = {}
    for record in records:
        combo_counts[record.decision] = combo_counts.get(record.decision, 0) + 1
        for name, value in zip(names, record.decision):
            bucket = variable_values[name]
            bucket[int(value)] = bucket.get(int(value), 0) + 1
    for name, bucket in variable_values.items():
        variable_values[name] = {
            value: count / total for value, count in sorted(bucket.items())
        }
    ordered = dict(
        sorted(combo_counts.items(), key=lambda item: (-item[1], item[0]))
    )
    combinations = {combo: count / total for combo, count in ordered.items()}
    return CriticalityIndex(variable_values=variable_values, combinations=combinations)
