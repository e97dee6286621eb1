"""Genetic search over bounded integer or binary decision vectors.

Fitness is either a single objective (optionally with a delay penalty pulling
the search toward a target completion) or the aggregated preference score of
the current generation.  Preference scores are population-relative, so the
search keeps every evaluated alternative and picks the final answer by
aggregating once over all distinct feasible candidates it has seen; on small
decision spaces that coincides with exhaustive enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .preference import PreferenceModel, aggregate, normalize_scores
from .sampling import RngHandle, ValidationError

#: Fitness assigned to constraint violators (death penalty).
DEATH_PENALTY = -np.inf

#: Equality-constraint tolerance.
EQUALITY_TOLERANCE = 1e-9


class InfeasibleSearchError(RuntimeError):
    """No feasible decision vector could be found."""


@dataclass(frozen=True)
class GaConfig:
    population: int = 100
    generations: int = 60
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # defaults to 1/genes
    tournament_size: int = 3
    elitism: int = 2
    stall_generations: int = 15
    init_retries: int = 20

    def __post_init__(self) -> None:
        if self.population < 4 or self.population % 2:
            raise ValidationError("population must be even and at least 4")
        if self.generations < 1:
            raise ValidationError("generation cap must be positive")
        for name in ("crossover_rate", "mutation_rate"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")
        if self.tournament_size < 1 or self.elitism < 0:
            raise ValidationError("tournament size must be >= 1 and elitism >= 0")


@dataclass(frozen=True)
class DelayPenalty:
    """Adds ``rate * max(duration - target, 0)`` to a minimized scalar objective."""

    target: float
    rate_per_day: float

    def apply(self, objectives: Mapping[str, np.ndarray]) -> np.ndarray:
        return self.rate_per_day * np.maximum(
            np.asarray(objectives["duration"], dtype=float) - self.target, 0.0
        )


@dataclass(frozen=True)
class OptimizationMode:
    """Either preference-aggregation search or a single scalar objective."""

    kind: str  # "moo" | "soo"
    objective: str | None = None
    direction: str = "min"
    penalties: tuple[DelayPenalty, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("moo", "soo"):
            raise ValidationError(f"unknown optimization kind {self.kind!r}")
        if self.kind == "soo" and not self.objective:
            raise ValidationError("single-objective mode needs an objective name")
        if self.direction not in ("min", "max"):
            raise ValidationError(f"direction must be 'min' or 'max', got {self.direction!r}")

    @classmethod
    def moo(cls) -> "OptimizationMode":
        return cls(kind="moo")

    @classmethod
    def soo(
        cls,
        objective: str,
        direction: str = "min",
        penalties: Sequence[DelayPenalty] = (),
    ) -> "OptimizationMode":
        return cls(kind="soo", objective=objective, direction=direction,
                   penalties=tuple(penalties))


@dataclass(frozen=True)
class DecisionSpace:
    """Per-gene integer bounds plus structural constraints on the vector."""

    bounds: tuple[tuple[int, int], ...]
    min_sum: int | None = None

    def __post_init__(self) -> None:
        for lb, ub in self.bounds:
            if lb > ub:
                raise ValidationError(f"bound ({lb}, {ub}) has lb > ub")

    @property
    def n_genes(self) -> int:
        return len(self.bounds)

    @property
    def is_binary(self) -> bool:
        return all(b == (0, 1) for b in self.bounds)

    def grid(self) -> np.ndarray:
        """Every vector in the bounded box, lexicographically ordered."""
        axes = [np.arange(lb, ub + 1) for lb, ub in self.bounds]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def check_constraints(
    x: Sequence[int], space: DecisionSpace
) -> tuple[bool, list[str]]:
    """Evaluate structural bounds and declared constraints; returns (feasible, violations)."""
    x = np.asarray(x)
    violations: list[str] = []
    if x.shape != (space.n_genes,):
        violations.append(
            f"dimension: expected {space.n_genes} variables, got {x.shape}"
        )
        return False, violations
    for value, (lb, ub) in zip(x, space.bounds):
        if not lb <= value <= ub:
            if (lb, ub) == (0, 1):
                violations.append(f"binary domain: value {value} not in {{0, 1}}")
            else:
                violations.append(f"bounds: value {value} outside [{lb}, {ub}]")
    if space.min_sum is not None and int(x.sum()) < space.min_sum:
        violations.append(
            f"fleet size: sum {int(x.sum())} below required minimum {space.min_sum}"
        )
    return not violations, violations


def _feasible_mask(pop: np.ndarray, space: DecisionSpace) -> np.ndarray:
    lows = np.array([b[0] for b in space.bounds])
    highs = np.array([b[1] for b in space.bounds])
    ok = np.all((pop >= lows) & (pop <= highs), axis=1)
    if space.min_sum is not None:
        ok &= pop.sum(axis=1) >= space.min_sum
    return ok


@dataclass
class OptimizationResult:
    vector: tuple[int, ...]
    objectives: dict[str, float]
    score: float
    evaluations: int
    generations: int


class _EvaluationCache:
    """Evaluates only unseen feasible vectors and remembers every objective row.

    Rows are stored positionally (aligned with :attr:`names`) to keep the
    per-generation bookkeeping cheap.
    """

    def __init__(self, evaluate: Callable[[np.ndarray], Mapping[str, np.ndarray]]):
        self._evaluate = evaluate
        self.names: list[str] = []
        self.vectors: list[tuple[int, ...]] = []
        self.rows: dict[tuple[int, ...], tuple[float, ...]] = {}

    def lookup(self, pop: np.ndarray, feasible: np.ndarray) -> list[tuple[float, ...] | None]:
        keys = list(map(tuple, pop.tolist()))
        fresh = []
        seen_now = set()
        for key, ok in zip(keys, feasible):
            if ok and key not in self.rows and key not in seen_now:
                fresh.append(key)
                seen_now.add(key)
        if fresh:
            batch = self._evaluate(np.array(fresh, dtype=int))
            if not self.names:
                self.names = list(batch)
            columns = np.column_stack([np.asarray(batch[name], dtype=float)
                                       for name in self.names])
            for key, row in zip(fresh, map(tuple, columns.tolist())):
                self.rows[key] = row
                self.vectors.append(key)
        return [self.rows.get(key) for key in keys]

    def row_dict(self, key: tuple[int, ...]) -> dict[str, float]:
        return dict(zip(self.names, self.rows[key]))


def _scalar_fitness(
    matrix: np.ndarray, names: Sequence[str], mode: OptimizationMode
) -> np.ndarray:
    values = matrix[:, names.index(mode.objective)].copy()
    if mode.penalties:
        columns = {name: matrix[:, i] for i, name in enumerate(names)}
        for penalty in mode.penalties:
            values += penalty.apply(columns)
    return -values if mode.direction == "min" else values


def _preference_fitness(
    matrix: np.ndarray, names: Sequence[str], model: PreferenceModel
) -> np.ndarray:
    if matrix.shape[0] == 1:
        return np.zeros(1)
    values = {
        objective: matrix[:, names.index(objective)] for objective in model.objectives
    }
    scores = model.score_matrix(values)
    return aggregate(normalize_scores(scores), model.weights)


def _population_fitness(
    rows: list[tuple[float, ...] | None],
    names: Sequence[str],
    feasible: np.ndarray,
    mode: OptimizationMode,
    model: PreferenceModel | None,
) -> np.ndarray:
    fitness = np.full(len(rows), DEATH_PENALTY)
    index = np.flatnonzero(feasible)
    if index.size == 0:
        return fitness
    matrix = np.array([rows[i] for i in index], dtype=float)
    if mode.kind == "soo":
        fitness[index] = _scalar_fitness(matrix, names, mode)
    else:
        fitness[index] = _preference_fitness(matrix, names, model)
    return fitness


def optimize(
    evaluate: Callable[[np.ndarray], Mapping[str, np.ndarray]],
    model: PreferenceModel | None,
    mode: OptimizationMode,
    space: DecisionSpace,
    cfg: GaConfig,
    rng: RngHandle | np.random.Generator,
) -> OptimizationResult:
    """Search the decision space and return the best feasible vector.

    ``evaluate`` maps a (population x genes) integer matrix to named objective
    arrays and must be deterministic within the call context (samples frozen
    beforehand).  The final answer is selected over all distinct feasible
    vectors evaluated during the run: the scalar optimum in single-objective
    mode, the aggregated-preference argmax otherwise, with lexicographic
    tie-breaking either way.
    """
    if mode.kind == "moo" and model is None:
        raise ValidationError("preference model required for aggregated-preference search")
    gen = rng.generator() if isinstance(rng, RngHandle) else rng
    cache = _EvaluationCache(evaluate)
    lows = np.array([b[0] for b in space.bounds])
    highs = np.array([b[1] for b in space.bounds])
    mutation_rate = cfg.mutation_rate or 1.0 / space.n_genes

    pop = gen.integers(lows, highs + 1, size=(cfg.population, space.n_genes))
    for _ in range(cfg.init_retries):
        feasible = _feasible_mask(pop, space)
        if feasible.any():
            break
        pop = gen.integers(lows, highs + 1, size=(cfg.population, space.n_genes))
    else:
        raise InfeasibleSearchError(
            "no feasible decision vector found during initialization"
        )

    stall = 0
    previous_best: tuple[int, ...] | None = None
    generations_run = 0
    for generation in range(cfg.generations):
        generations_run = generation + 1
        feasible = _feasible_mask(pop, space)
        rows = cache.lookup(pop, feasible)
        fitness = _population_fitness(rows, cache.names, feasible, mode, model)
        if not np.isfinite(fitness).any():
            raise InfeasibleSearchError("population lost every feasible member")

        order = np.argsort(-fitness, kind="stable")
        best_vector = tuple(int(v) for v in pop[order[0]])
        if best_vector == previous_best:
            stall += 1
            if stall >= cfg.stall_generations:
                break
        else:
            stall = 0
            previous_best = best_vector
        if generation == cfg.generations - 1:
            break

        # Tournament selection over the whole population (violators lose).
        contenders = gen.integers(0, cfg.population, size=(cfg.population, cfg.tournament_size))
        winners = contenders[np.arange(cfg.population), np.argmax(fitness[contenders], axis=1)]
        parents = pop[winners]

        # Uniform crossover on consecutive pairs.
        children = parents.copy()
        pairs = cfg.population // 2
        do_cross = gen.random(pairs) < cfg.crossover_rate
        swap = gen.random((pairs, space.n_genes)) < 0.5
        swap &= do_cross[:, None]
        first, second = children[0::2].copy(), children[1::2].copy()
        first[swap], second[swap] = children[1::2][swap], children[0::2][swap]
        children[0::2], children[1::2] = first, second

        # Per-gene mutation resamples uniformly within bounds.
        mutate = gen.random((cfg.population, space.n_genes)) < mutation_rate
        resampled = gen.integers(lows, highs + 1, size=children.shape)
        children[mutate] = resampled[mutate]

        if cfg.elitism:
            children[: cfg.elitism] = pop[order[: cfg.elitism]]
        pop = children

    winner = _select_final(cache, space, mode, model)
    return OptimizationResult(
        vector=winner[0],
        objectives=winner[1],
        score=winner[2],
        evaluations=len(cache.vectors),
        generations=generations_run,
    )


def _select_final(
    cache: _EvaluationCache,
    space: DecisionSpace,
    mode: OptimizationMode,
    model: PreferenceModel | None,
) -> tuple[tuple[int, ...], dict[str, float], float]:
    candidates = cache.vectors  # feasible by construction
    if not candidates:
        raise InfeasibleSearchError("no feasible vector was evaluated")
    matrix = np.array([cache.rows[v] for v in candidates], dtype=float)
    if mode.kind == "soo":
        scores = _scalar_fitness(matrix, cache.names, mode)
    elif len(candidates) == 1:
        scores = np.zeros(1)
    else:
        scores = _preference_fitness(matrix, cache.names, model)
    best = _argbest(scores, candidates)
    vector = candidates[best]
    raw = scores[best]
    if mode.kind == "soo" and mode.direction == "min":
        raw = -raw
    return vector, cache.row_dict(vector), float(raw)


def _argbest(scores: np.ndarray, candidates: Sequence[tuple[int, ...]]) -> int:
    """Index of the highest score; ties go to the lexicographically smallest vector."""
    genes = np.array(candidates)
    keys = tuple(genes[:, g] for g in range(genes.shape[1] - 1, -1, -1)) + (-scores,)
    return int(np.lexsort(keys)[0])


def enumerate_optimum(
    evaluate: Callable[[np.ndarray], Mapping[str, np.ndarray]],
    model: PreferenceModel | None,
    mode: OptimizationMode,
    space: DecisionSpace,
) -> tuple[tuple[int, ...], float]:
    """Exhaustive reference: scores every feasible vector in the bounded box.

    Uses the same scoring and tie-breaking as the search's final selection, so
    on fully explored spaces the two agree exactly.
    """
    grid = space.grid()
    feasible = grid[_feasible_mask(grid, space)]
    if feasible.size == 0:
        raise InfeasibleSearchError("decision space has no feasible vector")
    batch = evaluate(feasible)
    names = list(batch)
    matrix = np.column_stack([np.asarray(batch[name], dtype=float) for name in names])
    if mode.kind == "soo":
        scores = _scalar_fitness(matrix, names, mode)
    elif matrix.shape[0] == 1:
        scores = np.zeros(1)
    else:
        scores = _preference_fitness(matrix, names, model)
    keys = list(map(tuple, feasible.tolist()))
    best = _argbest(scores, keys)
    raw = scores[best]
    if mode.kind == "soo" and mode.direction == "min":
        raw = -raw
    return keys[best], float(raw)
