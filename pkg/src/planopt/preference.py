"""Stakeholder preference curves and relative aggregation of scored alternatives.

Aggregation works in two steps: preference scores are z-score normalized per
criterion over the population of alternatives, then each alternative gets the
representative score that minimizes the weighted least-squares distance to its
normalized criterion scores.  With weights summing to one that minimizer has
the closed form ``sum_j w_j * z_ij``, which is what the engine evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .sampling import PERT_SHAPE, ValidationError

#: Knot budget for discretized curve shapes.
CURVE_KNOTS = 256

#: Tolerance on weight sums.
WEIGHT_TOLERANCE = 1e-9

MAX_PREFERENCE = 100.0


@dataclass(frozen=True)
class PreferenceCurve:
    """Maps an objective value to satisfaction points in [0, 100].

    Piecewise linear between knots; values outside the knot support clamp to
    zero preference.
    """

    knots_x: tuple[float, ...]
    knots_y: tuple[float, ...]

    def __post_init__(self) -> None:
        xs, ys = np.asarray(self.knots_x), np.asarray(self.knots_y)
        if xs.size < 2 or xs.size != ys.size:
            raise ValidationError("a curve needs at least two (value, preference) knots")
        if np.any(np.diff(xs) <= 0):
            raise ValidationError("curve knot values must be strictly increasing")
        if ys.min() < 0.0 or ys.max() > MAX_PREFERENCE:
            raise ValidationError("curve preference points must lie in [0, 100]")

    @classmethod
    def linear(cls, points: Sequence[tuple[float, float]]) -> "PreferenceCurve":
        xs, ys = zip(*points)
        return cls(tuple(float(x) for x in xs), tuple(float(y) for y in ys))

    @classmethod
    def beta_pert(
        cls, low: float, mode: float, high: float, knots: int = CURVE_KNOTS
    ) -> "PreferenceCurve":
        """Mound-shaped curve: the PERT density over [low, high] scaled so the mode scores 100.

        Asymmetry is controlled by placing the mode off-center; the curve is
        tabulated on ``knots`` points (mode included) for fast evaluation.
        """
        if not low < high:
            raise ValidationError("beta-pert curve needs low < high")
        if not low <= mode <= high:
            raise ValidationError("beta-pert curve mode must lie inside [low, high]")
        span = high - low
        alpha = 1.0 + PERT_SHAPE * (mode - low) / span
        beta = 1.0 + PERT_SHAPE * (high - mode) / span
        left = np.linspace(low, mode, max(2, knots // 2))
        right = np.linspace(mode, high, max(2, knots - knots // 2 + 1))
        xs = np.unique(np.concatenate([left, right]))
        ys = MAX_PREFERENCE * _pert_density_ratio(xs, low, mode, high, alpha, beta)
        return cls(tuple(xs.tolist()), tuple(ys.tolist()))

    @property
    def support(self) -> tuple[float, float]:
        return self.knots_x[0], self.knots_x[-1]

    def __call__(self, values):
        scalar = np.isscalar(values)
        v = np.atleast_1d(np.asarray(values, dtype=float))
        out = np.interp(v, self.knots_x, self.knots_y)
        lo, hi = self.support
        out[(v < lo) | (v > hi)] = 0.0
        return float(out[0]) if scalar else out


def _pert_density_ratio(values, low, mode, high, alpha, beta):
    """Density relative to the density at the mode, handling edge modes."""
    v = np.clip(values, low, high)
    with np.errstate(divide="ignore", invalid="ignore"):
        if mode > low:
            left = np.power((v - low) / (mode - low), alpha - 1.0)
        else:
            left = np.ones_like(v)
        if mode < high:
            right = np.power((high - v) / (high - mode), beta - 1.0)
        else:
            right = np.ones_like(v)
    return left * right


@dataclass(frozen=True)
class Criterion:
    """One stakeholder's preference toward one objective, with its effective weight."""

    stakeholder: str
    objective: str
    curve: PreferenceCurve
    weight: float


class PreferenceModel:
    """Immutable set of criteria whose effective weights sum to one."""

    def __init__(self, criteria: Sequence[Criterion]) -> None:
        self.criteria = tuple(criteria)
        if not self.criteria:
            raise ValidationError("preference model needs at least one criterion")
        weights = np.array([c.weight for c in self.criteria])
        if weights.min() < 0.0:
            raise ValidationError("criterion weights must be non-negative")
        total = float(weights.sum())
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValidationError(f"criterion weights must sum to 1, got {total!r}")
        self.weights = weights

    @property
    def objectives(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for criterion in self.criteria:
            seen.setdefault(criterion.objective, None)
        return tuple(seen)

    def score_matrix(self, objective_values: Mapping[str, np.ndarray]) -> np.ndarray:
        """Preference points, one row per alternative and one column per criterion."""
        columns = [
            criterion.curve(np.asarray(objective_values[criterion.objective], dtype=float))
            for criterion in self.criteria
        ]
        return np.column_stack(columns)


@dataclass(frozen=True)
class WeightScheme:
    """Global stakeholder weights times local objective weights.

    ``local`` maps stakeholder name to its per-objective weights.  Globals must
    sum to one, each stakeholder's locals must sum to one, hence the effective
    products sum to one as well.
    """

    stakeholders: Mapping[str, float]
    local: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        total = sum(self.stakeholders.values())
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValidationError(f"global stakeholder weights must sum to 1, got {total!r}")
        for name in self.local:
            if name not in self.stakeholders:
                raise ValidationError(f"local weights given for unknown stakeholder {name!r}")
        for name, objectives in self.local.items():
            subtotal = sum(objectives.values())
            if abs(subtotal - 1.0) > WEIGHT_TOLERANCE:
                raise ValidationError(
                    f"local weights of stakeholder {name!r} must sum to 1, got {subtotal!r}"
                )

    def effective(self) -> list[tuple[str, str, float]]:
        """(stakeholder, objective, effective weight) for every expressed preference."""
        out = []
        for name, objectives in self.local.items():
            for objective, weight in objectives.items():
                out.append((name, objective, self.stakeholders[name] * weight))
        return out


def normalize_scores(scores: np.ndarray) -> np.ndarray:
    """Z-score each criterion column over the population of alternatives.

    Uses the population (n-divisor) standard deviation.  A column without
    spread carries no ranking information and maps to zeros; spreads at
    floating-point rounding scale count as no spread.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2:
        raise ValidationError("score matrix must be 2-dimensional")
    if scores.shape[0] < 2:
        raise ValidationError("relative normalization needs at least two alternatives")
    mean = scores.mean(axis=0)
    std = scores.std(axis=0)
    z = np.zeros_like(scores)
    spread = std > 1e-12 * np.maximum(1.0, np.abs(mean))
    z[:, spread] = (scores[:, spread] - mean[spread]) / std[spread]
    return z


def aggregate(z: np.ndarray, weights: Sequence[float]) -> np.ndarray:
    """Representative score per alternative: the weighted least-squares best fit.

    Minimizing ``sum_j w_j (z_ij - P)^2`` over P with weights summing to one
    gives ``P_i = sum_j w_j z_ij`` exactly.
    """
    z = np.asarray(z, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if z.ndim != 2 or weights.shape != (z.shape[1],):
        raise ValidationError("weight vector must match the criterion dimension")
    total = float(weights.sum())
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise ValidationError(f"aggregation weights must sum to 1, got {total!r}")
    return z @ weights


def imap_fitness(
    alternatives: Sequence[Mapping[str, float]], model: PreferenceModel
) -> np.ndarray:
    """Aggregated preference score per alternative, aligned with input order.

    Composes curve evaluation per criterion, z-score normalization over the
    alternatives, and the weighted aggregation.  Scores are relative to the
    given population: only the ranking is comparable across calls.
    """
    values: dict[str, np.ndarray] = {}
    for objective in model.objectives:
        try:
            values[objective] = np.array([alt[objective] for alt in alternatives], dtype=float)
        except KeyError as exc:
            raise ValidationError(f"alternative missing objective {exc.args[0]!r}") from exc
    scores = model.score_matrix(values)
    return aggregate(normalize_scores(scores), model.weights)
