"""Univariate marginal model: per-bit frequencies with fixation clamps.

Not a neural model; it calibrates the EDA pipeline because its behavior is
well known (solves onemax, is deceived by traps).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MarginalModel:
    """Independent Bernoulli(p_j) per bit, p clamped to [1/n, 1-1/n] on fit.

    Needs n >= 3: at n = 2 the clamp interval collapses to the single
    point 0.5 and fit degenerates.
    """

    n: int
    p: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"marginal model needs n >= 3, got n={self.n}")
        self.p = np.full(self.n, 0.5)

    @property
    def clamp_bounds(self) -> tuple[float, float]:
        return 1.0 / self.n, 1.0 - 1.0 / self.n

    def fit(self, genotypes: np.ndarray, rng: np.random.Generator | None = None) -> None:
        genotypes = np.asarray(genotypes)
        if genotypes.ndim != 2 or genotypes.shape[0] == 0 or genotypes.shape[1] != self.n:
            raise ValueError(f"need a nonempty (count, {self.n}) training set")
        lo, hi = self.clamp_bounds
        self.p = np.clip(genotypes.mean(axis=0), lo, hi)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        return (rng.random((count, self.n)) < self.p).astype(np.uint8)


@dataclass(frozen=True)
class UmdaConfig:
    """Model config for the EDA loop; the marginal model has no knobs."""

    warm_start: bool = False

    def build(self, n: int, rng: np.random.Generator) -> MarginalModel:
        return MarginalModel(n)
