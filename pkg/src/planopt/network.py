"""Project activity network: per-iteration duration realization and critical-path analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .sampling import (
    ThreePointEstimate,
    ValidationError,
    sample_beta_pert,
    sample_risk_occurrences,
)

#: Activities whose total float is below this are reported as critical.
FLOAT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Activity:
    id: int
    description: str
    duration: ThreePointEstimate
    predecessors: tuple[int, ...] = ()


@dataclass(frozen=True)
class RiskEvent:
    """Delay event that strikes all affected activities with one sampled impact."""

    id: int
    description: str
    impact: ThreePointEstimate
    activities: tuple[int, ...]
    probability: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValidationError(
                f"risk {self.id} occurrence probability must lie in [0, 1], "
                f"got {self.probability}"
            )


@dataclass(frozen=True)
class SharedUncertaintyFactor:
    """Common-cause deviation sampled once per iteration and added to every related activity.

    The deviation may be negative at its optimistic end; realized durations are
    clamped at zero after all deviations are applied.
    """

    id: int
    description: str
    deviation: ThreePointEstimate
    activities: tuple[int, ...]


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def merge(self, other: "ValidationReport") -> None:
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)


@dataclass(frozen=True)
class NetworkRealization:
    """One realized schedule: early dates, completion time, and zero-float activities."""

    durations: dict[int, float]
    early_start: dict[int, float]
    early_finish: dict[int, float]
    total_float: dict[int, float]
    completion: float
    critical: tuple[int, ...]


class ProjectNetwork:
    """Immutable DAG of activities with attached risks and shared uncertainty factors.

    A virtual sink joins all terminal activities, so completion time is the
    maximum early finish over the whole graph.  ``edge_attributes`` is an inert
    per-link attribute map retained for downstream tooling; nothing in the
    engine consumes it.
    """

    def __init__(
        self,
        activities: Sequence[Activity],
        risks: Sequence[RiskEvent] = (),
        shared_factors: Sequence[SharedUncertaintyFactor] = (),
        edge_attributes: Mapping[tuple[int, int], Mapping[str, float]] | None = None,
    ) -> None:
        self.activities = tuple(activities)
        self.risks = tuple(risks)
        self.shared_factors = tuple(shared_factors)
        self.edge_attributes = dict(edge_attributes or {})
        self._index = {a.id: i for i, a in enumerate(self.activities)}
        self._topo: tuple[int, ...] | None = None

    def __len__(self) -> int:
        return len(self.activities)

    @property
    def activity_ids(self) -> tuple[int, ...]:
        return tuple(a.id for a in self.activities)

    def activity(self, activity_id: int) -> Activity:
        return self.activities[self._index[activity_id]]

    def index_of(self, activity_id: int) -> int:
        return self._index[activity_id]

    def successors(self) -> dict[int, list[int]]:
        succ: dict[int, list[int]] = {a.id: [] for a in self.activities}
        for act in self.activities:
            for pred in act.predecessors:
                succ[pred].append(act.id)
        return succ

    def topological_order(self) -> tuple[int, ...]:
        """Activity ids in dependency order; raises if the graph has a cycle."""
        if self._topo is None:
            order, cyclic = self._kahn()
            if cyclic:
                raise ValidationError(f"network contains a cycle involving activities {cyclic}")
            self._topo = tuple(order)
        return self._topo

    def _kahn(self) -> tuple[list[int], list[int]]:
        indegree = {a.id: 0 for a in self.activities}
        for act in self.activities:
            for pred in act.predecessors:
                if pred in indegree:
                    indegree[act.id] += 1
        succ = self.successors()
        ready = [aid for aid in self.activity_ids if indegree[aid] == 0]
        order: list[int] = []
        while ready:
            aid = ready.pop(0)
            order.append(aid)
            for nxt in succ[aid]:
                indegree[nxt] -= 1
                if indegree[nxt] == 0:
                    ready.append(nxt)
        cyclic = [aid for aid in self.activity_ids if aid not in set(order)]
        return order, cyclic


def validate_network(net: ProjectNetwork) -> ValidationReport:
    """Structural checks: unique ids, resolvable references, acyclicity, probability ranges.

    Report-carrying: problems are listed, nothing raises.
    """
    report = ValidationReport()
    seen: set[int] = set()
    for act in net.activities:
        if act.id in seen:
            report.errors.append(f"duplicate activity id {act.id}")
        seen.add(act.id)
    ids = set(net.activity_ids)
    for act in net.activities:
        for pred in act.predecessors:
            if pred == act.id:
                report.errors.append(f"activity {act.id} depends on itself")
            elif pred not in ids:
                report.errors.append(
                    f"activity {act.id} references unknown predecessor {pred}"
                )
    for risk in net.risks:
        for aid in risk.activities:
            if aid not in ids:
                report.errors.append(f"risk {risk.id} references unknown activity {aid}")
        if not 0.0 <= risk.probability <= 1.0:
            report.errors.append(
                f"risk {risk.id} occurrence probability {risk.probability} outside [0, 1]"
            )
    for factor in net.shared_factors:
        for aid in factor.activities:
            if aid not in ids:
                report.errors.append(
                    f"shared factor {factor.id} references unknown activity {aid}"
                )
    if not report.errors:
        order, cyclic = net._kahn()
        if cyclic:
            report.errors.append(f"cycle detected among activities {sorted(cyclic)}")
    return report


def realize_durations(net: ProjectNetwork, rng: np.random.Generator) -> dict[int, float]:
    """Sample one duration realization for every activity.

    Per activity: own Beta-PERT duration, plus the once-per-iteration sampled
    deviation of every related shared factor, plus the once-per-iteration
    sampled impact of every occurring risk that affects it.  Shared draws are
    applied in full to each related activity (common-cause correlation).
    Results are clamped at zero.

    Draw order is fixed (activities, factors, risk occurrences, risk impacts)
    so a given stream always yields the same realization.
    """
    realized = {act.id: float(sample_beta_pert(act.duration, rng)) for act in net.activities}
    for factor in net.shared_factors:
        deviation = float(sample_beta_pert(factor.deviation, rng))
        for aid in factor.activities:
            realized[aid] += deviation
    if net.risks:
        probabilities = np.array([r.probability for r in net.risks])
        occurred = sample_risk_occurrences(probabilities, rng)
        impacts = [float(sample_beta_pert(r.impact, rng)) for r in net.risks]
        for risk, hit, impact in zip(net.risks, occurred, impacts):
            if hit:
                for aid in risk.activities:
                    realized[aid] += impact
    return {aid: max(0.0, d) for aid, d in realized.items()}


def forward_pass(net: ProjectNetwork, durations: Mapping[int, float]) -> NetworkRealization:
    """Critical-path pass: early dates forward, late dates backward, zero-float set.

    Completion is the maximum early finish (virtual sink).  All activities with
    total float below :data:`FLOAT_TOLERANCE` are reported critical, so ties
    include every zero-float path.
    """
    order = net.topological_order()
    missing = [aid for aid in net.activity_ids if aid not in durations]
    if missing:
        raise ValidationError(f"durations missing for activities {missing}")
    early_start: dict[int, float] = {}
    early_finish: dict[int, float] = {}
    for aid in order:
        act = net.activity(aid)
        start = max((early_finish[p] for p in act.predecessors), default=0.0)
        early_start[aid] = start
        early_finish[aid] = start + durations[aid]
    completion = max(early_finish.values(), default=0.0)

    succ = net.successors()
    late_finish: dict[int, float] = {}
    late_start: dict[int, float] = {}
    for aid in reversed(order):
        finish = min((late_start[s] for s in succ[aid]), default=completion)
        late_finish[aid] = finish
        late_start[aid] = finish - durations[aid]
    total_float = {aid: late_start[aid] - early_start[aid] for aid in order}
    critical = tuple(
        sorted(aid for aid, slack in total_float.items() if abs(slack) <= FLOAT_TOLERANCE)
    )
    return NetworkRealization(
        durations=dict(durations),
        early_start=early_start,
        early_finish=early_finish,
        total_float=total_float,
        completion=completion,
        critical=critical,
    )


def completion_batch(net: ProjectNetwork, durations: np.ndarray) -> np.ndarray:
    """Completion times for a batch of realizations.

    ``durations`` has one row per realization and one column per activity in
    network order.  Equivalent to running :func:`forward_pass` row by row but
    vectorized for the optimizer's population loop.
    """
    order = net.topological_order()
    finish = np.zeros_like(durations)
    index = net.index_of
    for aid in order:
        act = net.activity(aid)
        col = index(aid)
        if act.predecessors:
            start = finish[:, index(act.predecessors[0])]
            for pred in act.predecessors[1:]:
                start = np.maximum(start, finish[:, index(pred)])
        else:
            start = np.zeros(durations.shape[0])
        finish[:, col] = start + durations[:, col]
    return finish.max(axis=1)


def apply_measures(
    durations: Mapping[int, float],
    allocations: Sequence[int],
    measures: Sequence,
    capacities: Mapping[int, float],
) -> tuple[dict[int, float], dict[int, float]]:
    """Apply allocated control measures to a realized duration map.

    Each allocated measure shortens its related activity by
    ``min(sampled capacity, remaining duration)``; durations never go negative
    and unrelated activities are untouched.  Measures are applied in list
    order, so two measures on one activity split the remaining duration
    deterministically.  Capacities are the iteration's frozen samples, drawn
    once before any search over allocations.

    Returns the updated duration map and the reduction actually applied per
    measure id.
    """
    updated = dict(durations)
    reductions: dict[int, float] = {}
    for measure, allocated in zip(measures, allocations):
        if measure.activity not in updated:
            raise ValidationError(
                f"measure {measure.id} references unknown activity {measure.activity}"
            )
        if not allocated:
            reductions[measure.id] = 0.0
            continue
        capacity = capacities[measure.id]
        applied = min(capacity, updated[measure.activity])
        updated[measure.activity] -= applied
        reductions[measure.id] = applied
    return updated, reductions


def apply_measures_batch(
    base: np.ndarray,
    allocations: np.ndarray,
    activity_columns: np.ndarray,
    capacities: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`apply_measures` over a population of allocation vectors.

    ``base`` is the frozen realization (one value per activity column),
    ``allocations`` is (population x measures) binary, ``activity_columns``
    maps measure position to activity column, ``capacities`` holds the frozen
    capacity samples.  Returns the (population x activities) duration matrix
    and the (population x measures) applied reductions.
    """
    pop = allocations.shape[0]
    durations = np.tile(base, (pop, 1))
    reductions = np.zeros_like(allocations, dtype=float)
    for n in range(allocations.shape[1]):
        col = activity_columns[n]
        applied = allocations[:, n] * np.minimum(capacities[n], durations[:, col])
        durations[:, col] -= applied
        reductions[:, n] = applied
    return durations, reductions
