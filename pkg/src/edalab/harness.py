"""Sweep driver: run matrices over population sizes, CSV emission, NK verify.

Per-run rows and per-size aggregates are written in a canonical order
(population size, then run index) so output is identical no matter how
runs were scheduled. Seeds are base_seed + run_index, repeated across
population sizes; any row can be reproduced from its (config, seed).
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .eda import EdaConfig, run_eda
from .errors import CapacityError, ConfigError
from .expconfig import ExperimentConfig
from .problems import ProblemInstance, brute_force_optimum, load_nk_instance

RUN_COLUMNS = ("problem", "n", "k", "model", "pop_size", "run_id", "seed",
               "generations", "unique_evals", "best_fitness", "optimum_found",
               "cpu_seconds")
AGGREGATE_COLUMNS = ("problem", "n", "k", "model", "pop_size",
                     "mean_best_fitness", "std_best_fitness",
                     "mean_unique_evals", "mean_cpu_seconds", "success_fraction")


@dataclass
class RunRow:
    problem: str
    n: int
    k: int | None
    model: str
    pop_size: int
    run_id: int
    seed: int
    generations: int
    unique_evals: int
    best_fitness: float
    optimum_found: bool
    cpu_seconds: float
    error: str = ""  # non-empty marks a failed run

    @property
    def failed(self) -> bool:
        return bool(self.error)

    def csv_values(self):
        return (self.problem, self.n, "" if self.k is None else self.k,
                self.model, self.pop_size, self.run_id, self.seed,
                self.generations, self.unique_evals,
                _fmt(self.best_fitness), self.optimum_found,
                _fmt(self.cpu_seconds))


@dataclass
class AggregateRow:
    problem: str
    n: int
    k: int | None
    model: str
    pop_size: int
    mean_best_fitness: float
    std_best_fitness: float
    mean_unique_evals: float
    mean_cpu_seconds: float
    success_fraction: float

    def csv_values(self):
        return (self.problem, self.n, "" if self.k is None else self.k,
                self.model, self.pop_size, _fmt(self.mean_best_fitness),
                _fmt(self.std_best_fitness), _fmt(self.mean_unique_evals),
                _fmt(self.mean_cpu_seconds), _fmt(self.success_fraction))


@dataclass
class SweepResult:
    config: ExperimentConfig
    instance: ProblemInstance
    rows: list
    aggregates: list

    @property
    def failures(self) -> int:
        return sum(1 for row in self.rows if row.failed)

    def successes_by_size(self) -> dict:
        return {agg.pop_size: agg.success_fraction for agg in self.aggregates}


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def execute_run(instance: ProblemInstance, config: ExperimentConfig,
                pop_size: int, run_id: int) -> RunRow:
    """One fully seeded run; failures come back as marked rows."""
    seed = config.seed + run_id
    base = dict(problem=config.problem, n=instance.n, k=config.k,
                model=config.model, pop_size=pop_size, run_id=run_id, seed=seed)
    try:
        record = run_eda(instance, EdaConfig(
            population_size=pop_size,
            model=config.model_config(),
            truncation_fraction=config.truncation,
            max_generations=config.max_generations,
            stall_generations=config.stall_generations,
            seed=seed,
        ))
        if record.unique_evaluations != record.unique_evals_recount:
            raise AssertionError("unique-evaluation counter diverged from its cache")
        return RunRow(**base, generations=record.generations_run,
                      unique_evals=record.unique_evaluations,
                      best_fitness=record.best_fitness,
                      optimum_found=record.optimum_found,
                      cpu_seconds=record.cpu_seconds)
    except Exception as exc:  # failed rows keep the sweep alive
        return RunRow(**base, generations=0, unique_evals=0,
                      best_fitness=float("nan"), optimum_found=False,
                      cpu_seconds=float("nan"), error=str(exc))


def _execute_task(args):
    return execute_run(*args)


def aggregate_rows(rows) -> list:
    """Per-size aggregates over non-failed rows (population std, ddof=0)."""
    by_size: dict[int, list] = {}
    for row in rows:
        if not row.failed:
            by_size.setdefault(row.pop_size, []).append(row)
    out = []
    for size in sorted(by_size):
        group = by_size[size]
        first = group[0]
        best = np.array([r.best_fitness for r in group], dtype=np.float64)
        out.append(AggregateRow(
            problem=first.problem, n=first.n, k=first.k, model=first.model,
            pop_size=size,
            mean_best_fitness=float(best.mean()),
            std_best_fitness=float(best.std(ddof=0)),
            mean_unique_evals=float(np.mean([r.unique_evals for r in group])),
            mean_cpu_seconds=float(np.mean([r.cpu_seconds for r in group])),
            success_fraction=float(np.mean([r.optimum_found for r in group])),
        ))
    return out


def run_sweep(config: ExperimentConfig, jobs: int = 1,
              instance: ProblemInstance | None = None) -> SweepResult:
    """runs_per_setting runs for every population size, optionally in parallel.

    Runs are independent and fully seeded, so scheduling cannot change any
    non-timing output.
    """
    if instance is None:
        instance = config.build_instance()
    tasks = [(instance, config, pop_size, run_id)
             for pop_size in sorted(config.pop_sizes)
             for run_id in range(config.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_execute_task, tasks, chunksize=1))
    else:
        rows = [execute_run(*task) for task in tasks]
    rows.sort(key=lambda r: (r.pop_size, r.run_id))
    return SweepResult(config, instance, rows, aggregate_rows(rows))


def write_run_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_values())


def write_aggregate_csv(aggregates, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_COLUMNS)
        for agg in aggregates:
            writer.writerow(agg.csv_values())


@dataclass
class VerifyReport:
    path: str
    n: int
    k: int
    stated_optimum: float | None
    computed_optimum: float
    optimum_genotype: np.ndarray
    match: bool | None  # None when the file states no optimum

    def summary(self) -> str:
        bits = "".join(str(int(b)) for b in self.optimum_genotype)
        head = (f"{self.path}: nk n={self.n} k={self.k}, "
                f"brute-force optimum {_fmt(self.computed_optimum)} at {bits}")
        if self.stated_optimum is None:
            return head + "; file states no optimum"
        verdict = "MATCH" if self.match else "MISMATCH"
        return head + f"; stated {_fmt(self.stated_optimum)} -> {verdict}"


def verify_instance(path) -> VerifyReport:
    """Brute-force an NK file's optimum and compare with its stated value."""
    instance = load_nk_instance(path)
    value, genotype = brute_force_optimum(instance)  # raises CapacityError for big n
    stated = instance.known_optimum
    match = None
    if stated is not None:
        match = math.isclose(stated, value, rel_tol=1e-9, abs_tol=1e-9)
    return VerifyReport(str(path), instance.n, instance.k, stated, value,
                        genotype, match)
