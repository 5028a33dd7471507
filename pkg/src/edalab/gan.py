"""Adversarial probabilistic model: generator + discriminator MLPs.

Training alternates strictly per training example: two discriminator SGD
steps (one on a generator sample, one on the real example) followed by one
generator step whose error signal is backpropagated through the frozen
discriminator. Sampling binarizes the generator's sigmoid outputs with
independent Bernoulli draws, which keeps sample diversity alive.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import NumericError


@dataclass(frozen=True)
class PriorConfig:
    """Noise source feeding the generator."""

    z_dim: int
    distribution: str = "uniform"  # uniform(0,1) or normal(0,1)

    def __post_init__(self):
        if self.z_dim < 1:
            raise ValueError("z_dim must be >= 1")
        if self.distribution not in ("uniform", "normal"):
            raise ValueError(f"prior must be 'uniform' or 'normal', got {self.distribution!r}")

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.distribution == "uniform":
            return rng.random((count, self.z_dim))
        return rng.standard_normal((count, self.z_dim))


@dataclass
class GanTrainingTrace:
    """Per-epoch means; steps holds (y, t, loss) triples when recording."""

    mean_loss_d: list = field(default_factory=list)
    mean_loss_g: list = field(default_factory=list)
    mean_d_real: list = field(default_factory=list)
    mean_d_fake: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "mean_loss_D", "mean_loss_G",
                             "mean_D_real", "mean_D_fake"])
            for epoch, row in enumerate(zip(self.mean_loss_d, self.mean_loss_g,
                                            self.mean_d_real, self.mean_d_fake)):
                writer.writerow([epoch] + [format(v, ".17g") for v in row])


class GanModel:
    """Generator/discriminator pair exposing the EDA model interface."""

    def __init__(self, generator: nn.Network, discriminator: nn.Network,
                 prior: PriorConfig, optimizer_g: nn.OptimizerConfig,
                 optimizer_d: nn.OptimizerConfig, epochs_per_fit: int,
                 batch_size: int = 1, record_steps: bool = False):
        if generator.out_size != discriminator.in_size:
            raise ValueError("generator output size must match discriminator input size")
        if discriminator.out_size != 1:
            raise ValueError("discriminator must have a single output unit")
        if generator.layers[-1].activation != "sigmoid":
            raise ValueError("generator output must be sigmoid (bit probabilities)")
        if discriminator.layers[-1].activation != "sigmoid":
            raise ValueError("discriminator output must be sigmoid (a probability)")
        if generator.in_size != prior.z_dim:
            raise ValueError("generator input size must match prior z_dim")
        if epochs_per_fit < 0 or batch_size < 1:
            raise ValueError("need epochs_per_fit >= 0 and batch_size >= 1")
        self.generator = generator
        self.discriminator = discriminator
        self.prior = prior
        self.optimizer_g = optimizer_g
        self.optimizer_d = optimizer_d
        self.epochs_per_fit = epochs_per_fit
        self.batch_size = batch_size
        self.record_steps = record_steps

    @property
    def n(self) -> int:
        return self.generator.out_size

    def fit(self, genotypes: np.ndarray, rng: np.random.Generator) -> GanTrainingTrace:
        """Alternating adversarial training over the selected genotypes."""
        data = np.asarray(genotypes, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != self.n:
            raise ValueError(f"need a nonempty (count, {self.n}) training set")
        trace = GanTrainingTrace()
        gen, disc = self.generator, self.discriminator
        state_g, state_d = nn.SgdState(), nn.SgdState()
        count = data.shape[0]
        for epoch in range(self.epochs_per_fit):
            order = rng.permutation(count)
            sum_loss_d = sum_loss_g = sum_d_real = sum_d_fake = 0.0
            d_steps = g_steps = 0
            for start in range(0, count, self.batch_size):
                x = data[order[start:start + self.batch_size]]
                b = x.shape[0]

                # discriminator: one step on a generator sample, one on data
                z = self.prior.sample(b, rng)
                fake = nn.forward(gen, z, mode="train", rng=rng).output
                for s, target in ((fake, 0.0), (x, 1.0)):
                    d_trace = nn.forward(disc, s, mode="train", rng=rng)
                    y = d_trace.output
                    losses = nn.cross_entropy(y, target)
                    grads = nn.backward(disc, d_trace, nn.cross_entropy_grad(y, target) / b)
                    nn.sgd_step(disc, grads.layers, self.optimizer_d, state_d, epoch)
                    sum_loss_d += float(losses.sum())
                    d_steps += b
                    if target == 1.0:
                        sum_d_real += float(y.sum())
                    else:
                        sum_d_fake += float(y.sum())
                    if self.record_steps:
                        trace.steps += [(float(yi), target, float(li))
                                        for yi, li in zip(y.ravel(), losses.ravel())]

                # generator: descend log(1 - D(G(z))) through the frozen D
                z = self.prior.sample(b, rng)
                g_trace = nn.forward(gen, z, mode="train", rng=rng)
                d_trace = nn.forward(disc, g_trace.output, mode="train", rng=rng)
                yc = np.clip(d_trace.output, nn.PROB_EPS, 1.0 - nn.PROB_EPS)
                sum_loss_g += float(np.log1p(-yc).sum())
                g_steps += b
                into_gen = nn.backward(disc, d_trace, (-1.0 / (1.0 - yc)) / b,
                                       param_grads=False).input_gradient
                g_grads = nn.backward(gen, g_trace, into_gen)
                nn.sgd_step(gen, g_grads.layers, self.optimizer_g, state_g, epoch)

            mean_d = sum_loss_d / d_steps
            mean_g = sum_loss_g / g_steps
            if not (np.isfinite(mean_d) and np.isfinite(mean_g)):
                raise NumericError(f"non-finite loss at epoch {epoch}")
            trace.mean_loss_d.append(mean_d)
            trace.mean_loss_g.append(mean_g)
            trace.mean_d_real.append(2.0 * sum_d_real / d_steps)
            trace.mean_d_fake.append(2.0 * sum_d_fake / d_steps)
        return trace

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """count genotypes: p = G(z), each bit an independent Bernoulli(p_j)."""
        if count == 0:
            return np.empty((0, self.n), dtype=np.uint8)
        z = self.prior.sample(count, rng)
        p = nn.forward(self.generator, z, mode="infer").output
        return (rng.random(p.shape) < p).astype(np.uint8)

    def bit_probabilities(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Generator outputs before binarization (diagnostics)."""
        z = self.prior.sample(count, rng)
        return nn.forward(self.generator, z, mode="infer").output

    def discriminator_score(self, genotype: np.ndarray) -> float:
        genotype = np.asarray(genotype, dtype=np.float64)
        if genotype.shape != (self.n,):
            raise ValueError(f"genotype shape {genotype.shape}, expected ({self.n},)")
        y = nn.forward(self.discriminator, genotype[None, :], mode="infer").output
        return float(np.clip(y[0, 0], nn.PROB_EPS, 1.0 - nn.PROB_EPS))


@dataclass(frozen=True)
class GanConfig:
    """Hyper-parameters with size-relative defaults resolved at build time.

    z_dim and hidden default to the problem size n and 2n respectively.
    """

    z_dim: int | None = None
    hidden: int | None = None
    epochs: int = 10
    prior: str = "uniform"
    batch_size: int = 1
    dropout: float = 0.0
    init: nn.InitSpec = nn.InitSpec("normal", 0.01)
    optimizer_g: nn.OptimizerConfig = nn.OptimizerConfig(learning_rate=0.1)
    optimizer_d: nn.OptimizerConfig = nn.OptimizerConfig(learning_rate=0.1)
    warm_start: bool = False
    record_steps: bool = False

    def build(self, n: int, rng: np.random.Generator) -> GanModel:
        z_dim = self.z_dim if self.z_dim else n
        hidden = self.hidden if self.hidden else 2 * n
        generator = nn.init_network([z_dim, hidden, n], ["relu", "sigmoid"],
                                    self.init, rng, [self.dropout, 0.0])
        discriminator = nn.init_network([n, hidden, 1], ["relu", "sigmoid"],
                                        self.init, rng, [self.dropout, 0.0])
        return GanModel(generator, discriminator, PriorConfig(z_dim, self.prior),
                        self.optimizer_g, self.optimizer_d, self.epochs,
                        self.batch_size, self.record_steps)
