"""Denoising autoencoder model: reconstruct corrupted genotypes, sample by
iterating corrupt -> reconstruct -> redraw bits.

Corruption is salt-and-pepper: each bit is reset to a uniform random value
with probability rho. The sampling chain starts from the selected
population (stored at fit time), so exploration stays near good solutions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import NumericError


def corrupt(batch: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Reset each bit to uniform {0,1} with probability rate."""
    if rate == 0.0:
        return batch
    hit = rng.random(batch.shape) < rate
    noise = rng.integers(0, 2, size=batch.shape)
    return np.where(hit, noise, batch)


@dataclass
class DaeTrainingTrace:
    mean_reconstruction_loss: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "mean_reconstruction_loss"])
            for epoch, loss in enumerate(self.mean_reconstruction_loss):
                writer.writerow([epoch, format(loss, ".17g")])


class DaeModel:
    """Autoencoder over genotypes with a corrupt-reconstruct sampling chain."""

    def __init__(self, net: nn.Network, corruption_rate: float, chain_steps: int,
                 optimizer: nn.OptimizerConfig, epochs_per_fit: int,
                 sampling_corruption: float | None = None, batch_size: int = 1):
        if net.in_size != net.out_size:
            raise ValueError("autoencoder input and output sizes must match")
        if net.layers[-1].activation != "sigmoid":
            raise ValueError("autoencoder output must be sigmoid (bit probabilities)")
        # rate 0 (a plain autoencoder) stays constructible for edge cases
        if not 0.0 <= corruption_rate < 1.0:
            raise ValueError(f"corruption_rate must be in [0, 1), got {corruption_rate}")
        if sampling_corruption is not None and not 0.0 <= sampling_corruption < 1.0:
            raise ValueError("sampling corruption must be in [0, 1)")
        if chain_steps < 0 or epochs_per_fit < 0 or batch_size < 1:
            raise ValueError("chain_steps/epochs must be >= 0, batch_size >= 1")
        self.net = net
        self.corruption_rate = corruption_rate
        self.chain_steps = chain_steps
        self.optimizer = optimizer
        self.epochs_per_fit = epochs_per_fit
        self.sampling_corruption = (corruption_rate if sampling_corruption is None
                                    else sampling_corruption)
        self.batch_size = batch_size
        self.chain_seeds: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.net.in_size

    def fit(self, genotypes: np.ndarray, rng: np.random.Generator) -> DaeTrainingTrace:
        """Train to reconstruct clean genotypes from corrupted copies."""
        data = np.asarray(genotypes, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != self.n:
            raise ValueError(f"need a nonempty (count, {self.n}) training set")
        self.chain_seeds = np.ascontiguousarray(genotypes, dtype=np.uint8).copy()
        trace = DaeTrainingTrace()
        state = nn.SgdState()
        count = data.shape[0]
        for epoch in range(self.epochs_per_fit):
            order = rng.permutation(count)
            loss_sum = 0.0
            for start in range(0, count, self.batch_size):
                x = data[order[start:start + self.batch_size]]
                b = x.shape[0]
                noisy = corrupt(x, self.corruption_rate, rng)
                net_trace = nn.forward(self.net, noisy, mode="train", rng=rng)
                out = net_trace.output
                loss_sum += float(nn.cross_entropy(out, x).sum())
                grads = nn.backward(self.net, net_trace, nn.cross_entropy_grad(out, x) / b)
                nn.sgd_step(self.net, grads.layers, self.optimizer, state, epoch)
            mean_loss = loss_sum / count
            if not np.isfinite(mean_loss):
                raise NumericError(f"non-finite reconstruction loss at epoch {epoch}")
            trace.mean_reconstruction_loss.append(mean_loss)
        return trace

    def sample_chain(self, count: int, seeds: np.ndarray,
                     rng: np.random.Generator) -> np.ndarray:
        """Iterate the corrupt-reconstruct chain from explicit seed genotypes."""
        seeds = np.ascontiguousarray(seeds, dtype=np.uint8)
        if seeds.ndim != 2 or seeds.shape[0] == 0 or seeds.shape[1] != self.n:
            raise ValueError(f"need nonempty (count, {self.n}) seeds")
        states = seeds[np.arange(count) % seeds.shape[0]].copy()
        for _ in range(self.chain_steps):
            noisy = corrupt(states.astype(np.float64), self.sampling_corruption, rng)
            p = nn.forward(self.net, noisy, mode="infer").output
            states = (rng.random(p.shape) < p).astype(np.uint8)
        return states

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Chain sampling seeded from the most recent training set."""
        if self.chain_seeds is None:
            raise ValueError("no chain seeds: fit first or use sample_chain")
        return self.sample_chain(count, self.chain_seeds, rng)

    def reconstruct(self, batch: np.ndarray) -> np.ndarray:
        """Clean reconstruction probabilities (no corruption, infer mode)."""
        return nn.forward(self.net, np.asarray(batch, dtype=np.float64),
                          mode="infer").output


@dataclass(frozen=True)
class DaeConfig:
    """Hyper-parameters; hidden defaults to 2n at build time."""

    hidden: int | None = None
    epochs: int = 30
    rho: float = 0.1
    sample_rho: float | None = None
    chain_steps: int = 1
    batch_size: int = 1
    dropout: float = 0.0
    init: nn.InitSpec = nn.InitSpec("normal", 0.01)
    optimizer: nn.OptimizerConfig = nn.OptimizerConfig(learning_rate=0.1)
    warm_start: bool = False

    def build(self, n: int, rng: np.random.Generator) -> DaeModel:
        hidden = self.hidden if self.hidden else 2 * n
        net = nn.init_network([n, hidden, n], ["relu", "sigmoid"],
                              self.init, rng, [self.dropout, 0.0])
        return DaeModel(net, self.rho, self.chain_steps, self.optimizer,
                        self.epochs, self.sample_rho, self.batch_size)
