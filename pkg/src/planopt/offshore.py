"""Discrete-event simulation of cyclic anchor installation by a heterogeneous vessel fleet.

Vessels start pre-loaded to deck capacity and repeat two operations: install
the anchors on deck one by one, then bunker a new deck load while anchors
remain in the shared pool.  Every installation and every bunkering is an
activity instance with its own duration draw and its own independent risk
trials, so per-operation hazards (weather windows, supply hiccups) hit each
cycle separately.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sampling import ThreePointEstimate, ValidationError, sample_beta_pert


class InfeasibleError(ValueError):
    """The decision vector cannot produce a valid realization."""


@dataclass(frozen=True)
class VesselSpec:
    """One vessel type: capacity, price, and utilisation/emission figures."""

    name: str
    min_count: int
    max_count: int
    deck_space: int
    day_rate: float
    utilisation_probability: float
    emissions_per_day: float
    bunkering: ThreePointEstimate

    def __post_init__(self) -> None:
        if not 0 <= self.min_count <= self.max_count:
            raise ValidationError(f"vessel {self.name!r} bounds must satisfy 0 <= lb <= ub")
        if self.deck_space < 1:
            raise ValidationError(f"vessel {self.name!r} deck space must be at least 1")
        if not 0.0 <= self.utilisation_probability <= 1.0:
            raise ValidationError(
                f"vessel {self.name!r} utilisation probability must lie in [0, 1]"
            )


@dataclass(frozen=True)
class OperationRisk:
    """Per-operation hazard, retried independently for every activity instance."""

    description: str
    impact: ThreePointEstimate
    probability: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValidationError(
                f"risk {self.description!r} probability must lie in [0, 1]"
            )


@dataclass(frozen=True)
class OffshoreParams:
    """Site and campaign parameters.

    Anchor mass is an exogenous input (the geotechnical sizing happens
    elsewhere); it only drives the anchor supply cost.
    """

    anchors_total: int
    anchors_per_turbine: int
    anchor_mass: float
    installation: ThreePointEstimate
    install_risks: tuple[OperationRisk, ...] = ()
    bunker_risks: tuple[OperationRisk, ...] = ()
    anchor_cost_per_tonne: float = 815.0
    anchor_cost_fixed: float = 40_000.0

    def __post_init__(self) -> None:
        if self.anchors_total <= 0:
            raise ValidationError("total anchor count must be positive")
        if self.anchor_mass <= 0:
            raise ValidationError("anchor mass must be positive")


@dataclass(frozen=True)
class VesselActivity:
    """What one vessel instance did: anchors placed and its last-event finish time."""

    spec_name: str
    instance: int
    anchors_installed: int
    active_days: float


@dataclass(frozen=True)
class FleetRealization:
    completion: float
    vessels: tuple[VesselActivity, ...]

    @property
    def anchors_installed(self) -> int:
        return sum(v.anchors_installed for v in self.vessels)


class _Vessel:
    __slots__ = ("spec", "instance", "time", "deck", "installed", "last_anchor")

    def __init__(self, spec: VesselSpec, instance: int) -> None:
        self.spec = spec
        self.instance = instance
        self.time = 0.0
        self.deck = 0
        self.installed = 0
        self.last_anchor = 0.0


def _operation_time(
    base: ThreePointEstimate,
    risks: tuple[OperationRisk, ...],
    rng: np.random.Generator,
    count: int,
) -> np.ndarray:
    """Durations for ``count`` back-to-back instances of one operation.

    Each instance draws its own base duration and its own set of risk trials;
    impacts are drawn for every risk and masked by occurrence so the stream
    consumption per instance is constant.
    """
    total = np.asarray(sample_beta_pert(base, rng, size=count), dtype=float)
    if risks:
        probabilities = np.array([r.probability for r in risks])
        occurred = rng.random((count, len(risks))) < probabilities
        impacts = np.column_stack(
            [np.asarray(sample_beta_pert(r.impact, rng, size=count)) for r in risks]
        )
        total = total + (occurred * impacts).sum(axis=1)
    return total


def simulate_fleet(
    x: Sequence[int],
    params: OffshoreParams,
    specs: Sequence[VesselSpec],
    rng: np.random.Generator,
) -> FleetRealization:
    """Run the installation campaign for fleet ``x`` and return its realization.

    The shared anchor pool is drawn down in event-time order: vessels reserve
    ``min(deck space, pool)`` anchors when they start loading (initially at
    time zero, afterwards at the start of each bunkering), which guarantees the
    fleet installs exactly the available anchors.  Completion is the finish of
    the last installed anchor; a vessel's active days end with its own last
    event.
    """
    x = [int(v) for v in x]
    if len(x) != len(specs):
        raise ValidationError("decision vector length must match the number of vessel types")
    if sum(x) < 1:
        raise InfeasibleError("the fleet must contain at least one vessel")
    for count, spec in zip(x, specs):
        if not spec.min_count <= count <= spec.max_count:
            raise ValidationError(
                f"vessel count {count} for {spec.name!r} outside "
                f"[{spec.min_count}, {spec.max_count}]"
            )

    pool = params.anchors_total
    vessels: list[_Vessel] = []
    for spec, count in zip(specs, x):
        for instance in range(count):
            vessels.append(_Vessel(spec, instance))

    # Pre-load decks in fleet order at time zero; late vessels may get nothing.
    heap: list[tuple[float, int, _Vessel]] = []
    for order, vessel in enumerate(vessels):
        load = min(vessel.spec.deck_space, pool)
        pool -= load
        vessel.deck = load
        if load > 0:
            heapq.heappush(heap, (0.0, order, vessel))

    completion = 0.0
    while heap:
        now, order, vessel = heapq.heappop(heap)
        if vessel.deck > 0:
            durations = _operation_time(
                params.installation, params.install_risks, rng, vessel.deck
            )
            finish = now + float(durations.sum())
            vessel.installed += vessel.deck
            vessel.deck = 0
            vessel.time = finish
            vessel.last_anchor = finish
            completion = max(completion, finish)
            heapq.heappush(heap, (finish, order, vessel))
        elif pool > 0:
            load = min(vessel.spec.deck_space, pool)
            pool -= load
            vessel.deck = load
            duration = float(
                _operation_time(vessel.spec.bunkering, params.bunker_risks, rng, 1)[0]
            )
            vessel.time = now + duration
            heapq.heappush(heap, (vessel.time, order, vessel))
        # else: pool exhausted, vessel done; its last event time stands.

    activities = tuple(
        VesselActivity(
            spec_name=v.spec.name,
            instance=v.instance,
            anchors_installed=v.installed,
            active_days=v.time,
        )
        for v in vessels
    )
    return FleetRealization(completion=completion, vessels=activities)
