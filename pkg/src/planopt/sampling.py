"""Beta-PERT and Bernoulli sampling on reproducible, counter-based random streams."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

UNIT_DAYS = "days"
UNIT_CURRENCY = "currency"
UNIT_POINTS = "points"

#: Weight of the most-likely value in the classic PERT mean (a + 4m + b) / 6.
PERT_SHAPE = 4.0

_U64_MAX = 2**64


class ValidationError(ValueError):
    """Input violates a structural precondition of the engine."""


@dataclass(frozen=True)
class ThreePointEstimate:
    """Optimistic / most-likely / pessimistic triple defining a Beta-PERT density.

    Construction enforces ``optimistic <= most_likely <= pessimistic``.  Use
    :meth:`from_unsorted` for raw table data that may need reordering.
    """

    optimistic: float
    most_likely: float
    pessimistic: float
    unit: str = UNIT_DAYS

    def __post_init__(self) -> None:
        a, m, b = self.optimistic, self.most_likely, self.pessimistic
        for name, value in (("optimistic", a), ("most_likely", m), ("pessimistic", b)):
            if not np.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
        if a > m:
            raise ValidationError(
                f"optimistic ({a}) exceeds most_likely ({m}); triple must be ordered"
            )
        if m > b:
            raise ValidationError(
                f"most_likely ({m}) exceeds pessimistic ({b}); triple must be ordered"
            )

    @classmethod
    def from_unsorted(
        cls, optimistic: float, most_likely: float, pessimistic: float, unit: str = UNIT_DAYS
    ) -> tuple["ThreePointEstimate", bool]:
        """Build an estimate, sorting the triple ascending if needed.

        Returns the estimate and a flag telling whether reordering was applied,
        so ingestion can surface a warning instead of silently discarding data.
        """
        triple = (optimistic, most_likely, pessimistic)
        ordered = tuple(sorted(triple))
        return cls(*ordered, unit=unit), ordered != triple

    @property
    def is_point(self) -> bool:
        """True when the support collapses to a single value."""
        return self.optimistic == self.pessimistic

    @property
    def spread(self) -> float:
        return self.pessimistic - self.optimistic

    def mean(self) -> float:
        """PERT expectation (a + 4m + b) / 6."""
        return (self.optimistic + PERT_SHAPE * self.most_likely + self.pessimistic) / (
            PERT_SHAPE + 2.0
        )

    def std(self) -> float:
        if self.is_point:
            return 0.0
        alpha, beta = self.shape_parameters()
        total = alpha + beta
        var = self.spread**2 * alpha * beta / (total**2 * (total + 1.0))
        return float(np.sqrt(var))

    def shape_parameters(self) -> tuple[float, float]:
        """Beta shape pair (alpha, beta) for the rescaled [a, b] support."""
        if self.is_point:
            raise ValidationError("point estimate has no Beta shape")
        span = self.spread
        alpha = 1.0 + PERT_SHAPE * (self.most_likely - self.optimistic) / span
        beta = 1.0 + PERT_SHAPE * (self.pessimistic - self.most_likely) / span
        return alpha, beta

    def with_unit(self, unit: str) -> "ThreePointEstimate":
        return replace(self, unit=unit)


@dataclass(frozen=True)
class RngHandle:
    """Addressable random stream: (seed, stream) keys a counter-based generator.

    Identical handles reproduce bitwise-identical sample sequences; distinct
    stream ids are statistically independent, so one handle per Monte-Carlo
    iteration makes iterations order-independent and parallelizable.
    """

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        for name, value in (("seed", self.seed), ("stream", self.stream)):
            if not 0 <= value < _U64_MAX:
                raise ValidationError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def sample_beta_pert(
    est: ThreePointEstimate,
    rng: np.random.Generator,
    size: int | None = None,
) -> float | np.ndarray:
    """Draw from the Beta-PERT density of ``est``; point estimates return exactly m.

    Every draw lies in ``[optimistic, pessimistic]`` and the long-run mean is
    ``(a + 4m + b) / 6``.
    """
    if est.is_point:
        if size is None:
            return est.most_likely
        return np.full(size, est.most_likely)
    alpha, beta = est.shape_parameters()
    draw = rng.beta(alpha, beta, size=size)
    return est.optimistic + est.spread * draw


def sample_risk_occurrence(p: float, rng: np.random.Generator) -> bool:
    """Bernoulli trial: True with probability ``p``."""
    _check_probability(p)
    return bool(rng.random() < p)


def sample_risk_occurrences(
    probabilities: np.ndarray, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Vectorized Bernoulli trials, one column per probability."""
    probabilities = np.asarray(probabilities, dtype=float)
    if probabilities.size and (probabilities.min() < 0.0 or probabilities.max() > 1.0):
        raise ValidationError("occurrence probabilities must lie in [0, 1]")
    shape = probabilities.shape if size is None else (size, *probabilities.shape)
    return rng.random(shape) < probabilities


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"occurrence probability must lie in [0, 1], got {p}")
