"""Objective functions for the two demonstrators: fleet planning and mitigation control."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .sampling import ThreePointEstimate, ValidationError, sample_beta_pert

#: Units of the named objective values the engine reports.
OBJECTIVE_UNITS = {
    "duration": "days",
    "cost": "EUR",
    "vessel_cost": "EUR",
    "utilisation": "-",
    "emissions": "t CO2",
    "nuisance": "points",
}


@dataclass(frozen=True)
class ControlMeasure:
    """Binary-allocatable mitigation action on one activity.

    Capacity is the recoverable duration, cost and nuisance its price tags;
    ``eta`` interpolates the cost between a one-off expense (0) and a charge
    fully proportional to the capacity actually used (1).
    """

    id: int
    description: str
    activity: int
    capacity: ThreePointEstimate
    cost: ThreePointEstimate
    nuisance: ThreePointEstimate
    eta: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValidationError(f"measure {self.id} eta must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class ControlObjectiveParams:
    """Completion scheme parameters for the control case.

    Delay beyond ``target_duration`` is penalized, earliness rewarded; the two
    adjustments are mutually exclusive by construction.  Rates default to zero
    (pure-penalty contracts quote only the penalty side).
    """

    target_duration: float
    delay_penalty_per_day: float = 0.0
    early_reward_per_day: float = 0.0
    nuisance_delay_rate: float = 0.0
    nuisance_early_rate: float = 0.0
    nuisance_scale: float = 10.0

    def __post_init__(self) -> None:
        if self.target_duration <= 0:
            raise ValidationError("target duration must be positive")
        if self.nuisance_scale <= 0:
            raise ValidationError("nuisance scale must be positive")
        for name in (
            "delay_penalty_per_day",
            "early_reward_per_day",
            "nuisance_delay_rate",
            "nuisance_early_rate",
        ):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")


@dataclass(frozen=True)
class MeasureSamples:
    """Frozen per-iteration draws of every measure's capacity, cost, and nuisance."""

    capacity: np.ndarray
    cost: np.ndarray
    nuisance: np.ndarray


def sample_measure_impacts(
    measures: Sequence[ControlMeasure], rng: np.random.Generator
) -> MeasureSamples:
    """Draw capacity, cost, and nuisance once per measure, in list order."""
    capacity = np.array([float(sample_beta_pert(m.capacity, rng)) for m in measures])
    cost = np.array([float(sample_beta_pert(m.cost, rng)) for m in measures])
    nuisance = np.array([float(sample_beta_pert(m.nuisance, rng)) for m in measures])
    return MeasureSamples(capacity=capacity, cost=cost, nuisance=nuisance)


def completion_deltas(delta: float, target: float) -> tuple[float, float]:
    """Overshoot and undershoot against the target; exactly one can be nonzero."""
    return max(delta - target, 0.0), max(target - delta, 0.0)


def completion_deltas_batch(delta: np.ndarray, target: float) -> tuple[np.ndarray, np.ndarray]:
    delta = np.asarray(delta, dtype=float)
    return np.maximum(delta - target, 0.0), np.maximum(target - delta, 0.0)


def control_cost_batch(
    allocations: np.ndarray,
    samples: MeasureSamples,
    reductions: np.ndarray,
    etas: np.ndarray,
    delta1: np.ndarray,
    delta2: np.ndarray,
    params: ControlObjectiveParams,
) -> np.ndarray:
    """Control cost per allocation row: realized measure cost plus the completion scheme.

    A measure's realized cost is its sampled cost scaled by
    ``(1 - eta) + eta * used_fraction`` where ``used_fraction`` is the applied
    reduction over the sampled capacity, so ``eta = 1`` charges proportionally
    to use and ``eta = 0`` charges the full one-off price.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        used = np.where(samples.capacity > 0.0, reductions / samples.capacity, 1.0)
    factor = (1.0 - etas) + etas * used
    measure_cost = (allocations * samples.cost * factor).sum(axis=1)
    return (
        measure_cost
        + delta1 * params.delay_penalty_per_day
        - delta2 * params.early_reward_per_day
    )


def control_cost(
    allocations: Sequence[int],
    measures: Sequence[ControlMeasure],
    reductions: Mapping[int, float],
    samples: MeasureSamples,
    deltas: tuple[float, float],
    params: ControlObjectiveParams,
) -> float:
    alloc = np.asarray(allocations, dtype=float).reshape(1, -1)
    red = np.array([[reductions.get(m.id, 0.0) for m in measures]])
    etas = np.array([m.eta for m in measures])
    out = control_cost_batch(
        alloc, samples, red, etas, np.array([deltas[0]]), np.array([deltas[1]]), params
    )
    return float(out[0])


def control_nuisance_batch(
    allocations: np.ndarray,
    samples: MeasureSamples,
    delta1: np.ndarray,
    delta2: np.ndarray,
    params: ControlObjectiveParams,
) -> np.ndarray:
    """Traffic nuisance per allocation row.

    The allocated share of the iteration's total sampled nuisance (over all
    candidate measures, allocated or not) is scaled to ``nuisance_scale``, then
    adjusted by the delay/earliness rates.  A zero total nuisance denominator
    yields zero base nuisance.
    """
    total = samples.nuisance.sum()
    if total > 0.0:
        base = (allocations * samples.nuisance).sum(axis=1) / total * params.nuisance_scale
    else:
        base = np.zeros(allocations.shape[0])
    return base + delta1 * params.nuisance_delay_rate - delta2 * params.nuisance_early_rate


def control_nuisance(
    allocations: Sequence[int],
    samples: MeasureSamples,
    deltas: tuple[float, float],
    params: ControlObjectiveParams,
) -> float:
    alloc = np.asarray(allocations, dtype=float).reshape(1, -1)
    out = control_nuisance_batch(
        alloc, samples, np.array([deltas[0]]), np.array([deltas[1]]), params
    )
    return float(out[0])


def offshore_objectives(fleet, x: Sequence[int], params, specs) -> dict[str, float]:
    """Objective values for one fleet realization.

    duration    completion time of the installation campaign (days)
    cost        anchor supply cost plus day rates over each vessel's active days (EUR)
    vessel_cost the day-rate component alone (EUR)
    utilisation probability the whole fleet would be better utilised elsewhere
    emissions   daily vessel emissions over active days (t CO2)
    """
    anchor_unit_cost = (
        params.anchor_cost_per_tonne * params.anchor_mass + params.anchor_cost_fixed
    )
    vessel_cost = 0.0
    emissions = 0.0
    by_name = {spec.name: spec for spec in specs}
    for vessel in fleet.vessels:
        spec = by_name[vessel.spec_name]
        vessel_cost += spec.day_rate * vessel.active_days
        emissions += spec.emissions_per_day * vessel.active_days
    utilisation = 1.0
    for spec, count in zip(specs, x):
        utilisation *= spec.utilisation_probability**count
    return {
        "duration": fleet.completion,
        "cost": anchor_unit_cost * params.anchors_total + vessel_cost,
        "vessel_cost": vessel_cost,
        "utilisation": utilisation,
        "emissions": emissions,
    }
