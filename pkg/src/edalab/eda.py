"""Generational EDA loop: evaluate, truncation-select, fit model, sample, merge.

The loop is model-agnostic: any object with fit(genotypes, rng) and
sample(count, rng) plugs in via a model config exposing build(n, rng).
Unique fitness evaluations are counted through a cache keyed by bit
pattern, which also makes repeat evaluations free.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import EdaRunError
from .problems import ProblemInstance, evaluate, evaluate_batch, random_population

OPTIMUM_EPS = 1e-9


@dataclass
class Population:
    genotypes: np.ndarray  # (N, n) uint8
    fitnesses: np.ndarray  # (N,) float64

    def __post_init__(self):
        if len(self.genotypes) != len(self.fitnesses):
            raise ValueError("genotypes and fitnesses must be parallel")

    def __len__(self) -> int:
        return len(self.genotypes)

    @property
    def best_fitness(self) -> float:
        return float(self.fitnesses.max())


@dataclass(frozen=True)
class EdaConfig:
    """Loop parameters plus a model config (build(n, rng) + warm_start)."""

    population_size: int
    model: object
    truncation_fraction: float = 0.5
    max_generations: int = 200
    stall_generations: int = 30
    seed: int = 0
    debug_fitness_checks: bool = False

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0.0 < self.truncation_fraction <= 1.0:
            raise ValueError(
                f"truncation_fraction must be in (0, 1], got {self.truncation_fraction}")
        if truncation_count(self.truncation_fraction, self.population_size) < 2:
            raise ValueError("truncation must keep at least 2 individuals")
        if self.max_generations < 0 or self.stall_generations < 1:
            raise ValueError("need max_generations >= 0 and stall_generations >= 1")


@dataclass
class RunRecord:
    """Outcome of one EDA run; cpu_seconds is the only non-reproducible field."""

    best_fitness_per_generation: list
    unique_evaluations: int
    unique_evals_recount: int
    unique_evals_per_generation: list
    generations_run: int
    optimum_found: bool
    cpu_seconds: float
    seed: int

    @property
    def best_fitness(self) -> float:
        return self.best_fitness_per_generation[-1]


def truncation_count(tau: float, size: int) -> int:
    """ceil(tau * size) with a tiny slack against float noise in tau * size."""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"truncation fraction must be in (0, 1], got {tau}")
    return min(size, math.ceil(tau * size - 1e-9))


def select_truncation(pop: Population, tau: float) -> Population:
    """Top ceil(tau*N) individuals, descending fitness, ties to earlier index."""
    keep = np.argsort(-pop.fitnesses, kind="stable")[:truncation_count(tau, len(pop))]
    return Population(pop.genotypes[keep], pop.fitnesses[keep])


class EvaluationCache:
    """Fitness memo keyed by genotype bit pattern; counts unique evaluations."""

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        self.table: dict[bytes, float] = {}
        self.unique = 0

    def evaluate(self, batch: np.ndarray) -> np.ndarray:
        batch = np.ascontiguousarray(batch, dtype=np.uint8)
        values = np.empty(len(batch), dtype=np.float64)
        missing: dict[bytes, list] = {}
        for idx, row in enumerate(batch):
            key = row.tobytes()
            cached = self.table.get(key)
            if cached is None:
                missing.setdefault(key, []).append(idx)
            else:
                values[idx] = cached
        if missing:
            rows = [batch[positions[0]] for positions in missing.values()]
            fresh = evaluate_batch(self.instance, np.stack(rows))
            for (key, positions), value in zip(missing.items(), fresh):
                self.table[key] = float(value)
                self.unique += 1
                values[positions] = value
        return values


def _hit_optimum(instance: ProblemInstance, best: float) -> bool:
    return (instance.known_optimum is not None
            and best >= instance.known_optimum - OPTIMUM_EPS)


def run_eda(instance: ProblemInstance, config: EdaConfig) -> RunRecord:
    """One full run; deterministic in (instance, config, seed) except timing."""
    rng = np.random.default_rng(config.seed)
    started = time.perf_counter()
    cache = EvaluationCache(instance)

    genotypes = random_population(instance, config.population_size, rng)
    pop = Population(genotypes, cache.evaluate(genotypes))
    best = pop.best_fitness
    best_trace = [best]
    unique_trace = [cache.unique]

    generations = 0
    stall = 0
    model = None
    while (not _hit_optimum(instance, best)
           and generations < config.max_generations
           and stall < config.stall_generations):
        generations += 1
        selected = select_truncation(pop, config.truncation_fraction)
        try:
            if model is None or not getattr(config.model, "warm_start", False):
                model = config.model.build(instance.n, rng)
            model.fit(selected.genotypes, rng)
            candidates = model.sample(config.population_size, rng)
        except Exception as exc:
            raise EdaRunError(str(exc), generations) from exc
        candidates = np.ascontiguousarray(candidates, dtype=np.uint8)
        if candidates.shape != (config.population_size, instance.n):
            raise EdaRunError(
                f"model sampled shape {candidates.shape}, expected "
                f"{(config.population_size, instance.n)}", generations)

        merged_g = np.concatenate([candidates, selected.genotypes])
        merged_f = np.concatenate([cache.evaluate(candidates), selected.fitnesses])
        keep = np.argsort(-merged_f, kind="stable")[:config.population_size]
        pop = Population(merged_g[keep], merged_f[keep])

        if config.debug_fitness_checks:
            for row, value in zip(pop.genotypes[:3], pop.fitnesses[:3]):
                assert evaluate(instance, row) == value

        if pop.best_fitness > best:
            best = pop.best_fitness
            stall = 0
        else:
            stall += 1
        best_trace.append(best)
        unique_trace.append(cache.unique)

    return RunRecord(
        best_fitness_per_generation=best_trace,
        unique_evaluations=cache.unique,
        unique_evals_recount=len(cache.table),
        unique_evals_per_generation=unique_trace,
        generations_run=generations,
        optimum_found=_hit_optimum(instance, best),
        cpu_seconds=time.perf_counter() - started,
        seed=config.seed,
    )
