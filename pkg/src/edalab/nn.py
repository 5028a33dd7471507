"""Minimal feed-forward network engine: dense layers, backprop, SGD.

Shared by the adversarial and autoencoder models. Inputs are batches with
one example per row; weights are (out, in) matrices. Probabilities are
clamped to [PROB_EPS, 1 - PROB_EPS] before any log.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError

PROB_EPS = 1e-12

ACTIVATIONS = ("sigmoid", "relu", "linear")


def sigmoid(z: np.ndarray) -> np.ndarray:
    # floor the argument so exp cannot overflow; saturation is unaffected
    return 1.0 / (1.0 + np.exp(-np.maximum(z, -500.0)))


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def clamp_probability(y):
    return np.minimum(np.maximum(y, PROB_EPS), 1.0 - PROB_EPS)


def cross_entropy(y, t):
    """-[t log y + (1-t) log(1-y)] with y clamped away from {0, 1}."""
    yc = clamp_probability(y)
    return -(t * np.log(yc) + (1.0 - t) * np.log1p(-yc))


def cross_entropy_grad(y, t):
    """d cross_entropy / dy at the clamped probability."""
    yc = clamp_probability(y)
    return (yc - t) / (yc * (1.0 - yc))


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    biases: np.ndarray  # (out,)
    activation: str
    dropout_rate: float = 0.0

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    @property
    def out_size(self) -> int:
        return self.weights.shape[0]

    @property
    def in_size(self) -> int:
        return self.weights.shape[1]


@dataclass
class Network:
    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network needs at least one layer")
        for prev, cur in zip(self.layers, self.layers[1:]):
            if cur.in_size != prev.out_size:
                raise ValueError(
                    f"layer sizes do not chain: {prev.out_size} -> {cur.in_size}")

    @property
    def in_size(self) -> int:
        return self.layers[0].in_size

    @property
    def out_size(self) -> int:
        return self.layers[-1].out_size

    def copy(self) -> "Network":
        return Network([DenseLayer(l.weights.copy(), l.biases.copy(),
                                   l.activation, l.dropout_rate)
                        for l in self.layers])


@dataclass(frozen=True)
class InitSpec:
    """Weight initialization: normal(sigma) or uniform(+-scale); biases zero."""

    kind: str = "normal"
    scale: float = 0.01

    def __post_init__(self):
        if self.kind not in ("normal", "uniform"):
            raise ValueError(f"init kind must be 'normal' or 'uniform', got {self.kind!r}")
        if self.scale < 0:
            raise ValueError("init scale must be >= 0")


def init_network(layer_sizes, activations, init: InitSpec,
                 rng: np.random.Generator, dropout_rates=None) -> Network:
    if len(layer_sizes) < 2:
        raise ValueError("topology needs at least an input and an output size")
    if len(activations) != len(layer_sizes) - 1:
        raise ValueError(
            f"{len(layer_sizes) - 1} layers need {len(layer_sizes) - 1} activations, "
            f"got {len(activations)}")
    if dropout_rates is None:
        dropout_rates = [0.0] * len(activations)
    layers = []
    for (fan_in, fan_out), act, rate in zip(
            zip(layer_sizes, layer_sizes[1:]), activations, dropout_rates):
        if init.kind == "normal":
            w = rng.normal(0.0, init.scale, size=(fan_out, fan_in))
        else:
            w = rng.uniform(-init.scale, init.scale, size=(fan_out, fan_in))
        layers.append(DenseLayer(w, np.zeros(fan_out), act, rate))
    return Network(layers)


@dataclass
class ForwardTrace:
    """Per-layer activations (and dropout masks) from one forward pass."""

    net: Network
    x: np.ndarray
    pre_activations: list
    outputs: list
    dropout_masks: list
    mode: str

    @property
    def output(self) -> np.ndarray:
        return self.outputs[-1]


def _apply_activation(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "sigmoid":
        return sigmoid(z)
    if kind == "relu":
        return relu(z)
    return z


def forward(net: Network, x: np.ndarray, mode: str = "infer",
            rng: np.random.Generator | None = None) -> ForwardTrace:
    """Run the batch through the network, recording per-layer activations.

    In train mode dropout masks are sampled (rng required when any layer
    drops); in infer mode dropped layers are scaled by 1 - dropout_rate.
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
    if not isinstance(x, np.ndarray) or x.dtype != np.float64:
        x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.in_size:
        raise ValueError(f"input shape {x.shape} does not match in-size {net.in_size}")
    if not np.isfinite(x).all():
        raise NumericError("non-finite network input")
    pre, outs, masks = [], [], []
    a = x
    for layer in net.layers:
        z = a @ layer.weights.T + layer.biases
        a = _apply_activation(layer.activation, z)
        mask = None
        if layer.dropout_rate > 0.0:
            if mode == "train":
                if rng is None:
                    raise ValueError("train-mode dropout needs an rng")
                mask = (rng.random(a.shape) >= layer.dropout_rate).astype(np.float64)
                a = a * mask
            else:
                a = a * (1.0 - layer.dropout_rate)
        pre.append(z)
        outs.append(a)
        masks.append(mask)
    # NaN propagates through every activation kind, so one gate on the
    # final output catches it; training loops also gate their losses
    if not np.isfinite(a).all():
        raise NumericError("non-finite activations")
    return ForwardTrace(net, x, pre, outs, masks, mode)


@dataclass
class Gradients:
    layers: list  # [(dW, db)] per layer, aligned with net.layers
    input_gradient: np.ndarray


def backward(net: Network, trace: ForwardTrace, output_gradient: np.ndarray,
             param_grads: bool = True) -> Gradients:
    """Backpropagate d(scalar loss)/d(output) through a recorded forward pass.

    Returns gradients w.r.t. every weight/bias plus the network input;
    batch rows contribute additively. With param_grads=False only the
    input gradient is computed (used when a downstream network is frozen).
    """
    if trace.net is not net:
        raise ValueError("activation trace belongs to a different network")
    if trace.mode != "train":
        raise ValueError("backward needs a train-mode forward trace")
    delta = np.asarray(output_gradient, dtype=np.float64)
    if delta.shape != trace.output.shape:
        raise ValueError(
            f"output gradient shape {delta.shape} != output shape {trace.output.shape}")
    grads = [None] * len(net.layers)
    for idx in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[idx]
        mask = trace.dropout_masks[idx]
        if mask is not None:
            delta = delta * mask
        if layer.activation == "sigmoid":
            # recorded output is post-dropout; recover sigma(z) when masked
            a = trace.outputs[idx] if mask is None else sigmoid(trace.pre_activations[idx])
            delta = delta * (a * (1.0 - a))
        elif layer.activation == "relu":
            delta = delta * (trace.pre_activations[idx] > 0)
        below = trace.outputs[idx - 1] if idx > 0 else trace.x
        if param_grads:
            grads[idx] = (delta.T @ below, delta.sum(axis=0))
        delta = delta @ layer.weights
    return Gradients(grads, delta)


@dataclass(frozen=True)
class Schedule:
    """Piecewise-linear multiplier over epochs, clamped outside the points."""

    points: tuple

    def __post_init__(self):
        pts = tuple((float(e), float(m)) for e, m in self.points)
        if not pts:
            raise ValueError("schedule needs at least one point")
        if any(m < 0 for _, m in pts):
            raise ValueError("schedule multipliers must be >= 0")
        if any(b <= a for (a, _), (b, _) in zip(pts, pts[1:])):
            raise ValueError("schedule epochs must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def at(self, epoch: float) -> float:
        pts = self.points
        if epoch <= pts[0][0]:
            return pts[0][1]
        if epoch >= pts[-1][0]:
            return pts[-1][1]
        for (e0, m0), (e1, m1) in zip(pts, pts[1:]):
            if e0 <= epoch <= e1:
                return m0 + (m1 - m0) * (epoch - e0) / (e1 - e0)
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class OptimizerConfig:
    """SGD hyper-parameters; schedules multiply the base values per epoch.

    learning_rate 0 is allowed so a zero-step optimizer stays expressible
    even though useful rates live in (0, 1).
    """

    learning_rate: float = 0.1
    momentum: float = 0.0
    weight_decay: float = 0.0
    alpha_schedule: Schedule | None = None
    momentum_schedule: Schedule | None = None
    decay_schedule: Schedule | None = None

    def __post_init__(self):
        if not 0.0 <= self.learning_rate < 1.0:
            raise ValueError(f"learning_rate must be in [0, 1), got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0.0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")

    def resolve(self, epoch: float) -> tuple[float, float, float]:
        alpha = self.learning_rate
        mom = self.momentum
        lam = self.weight_decay
        if self.alpha_schedule is not None:
            alpha *= self.alpha_schedule.at(epoch)
        if self.momentum_schedule is not None:
            mom *= self.momentum_schedule.at(epoch)
        if self.decay_schedule is not None:
            lam *= self.decay_schedule.at(epoch)
        return alpha, mom, lam


@dataclass
class SgdState:
    velocities: list | None = None

    def ensure(self, net: Network):
        if self.velocities is None:
            self.velocities = [(np.zeros_like(l.weights), np.zeros_like(l.biases))
                               for l in net.layers]
        return self.velocities


def sgd_step(net: Network, gradients, config: OptimizerConfig,
             state: SgdState, epoch: float) -> None:
    """One momentum-SGD update; weight decay applies to weights only."""
    alpha, mom, lam = config.resolve(epoch)
    if (mom == 0.0 and lam == 0.0 and config.momentum_schedule is None
            and config.decay_schedule is None):
        # velocity equals -alpha*grad and is never carried over
        for layer, (dw, db) in zip(net.layers, gradients):
            layer.weights -= alpha * dw
            layer.biases -= alpha * db
        return
    velocities = state.ensure(net)
    for layer, (dw, db), (vw, vb) in zip(net.layers, gradients, velocities):
        np.multiply(vw, mom, out=vw)
        if lam != 0.0:
            vw -= alpha * (dw + lam * layer.weights)
        else:
            vw -= alpha * dw
        layer.weights += vw
        np.multiply(vb, mom, out=vb)
        vb -= alpha * db
        layer.biases += vb


def save_weights(net: Network, path) -> None:
    """Debug snapshot: text, 17 significant digits, row-major weights then biases."""
    lines = []
    for idx, layer in enumerate(net.layers):
        lines.append(f"layer {idx} {layer.out_size} {layer.in_size}")
        for row in layer.weights:
            lines.append(" ".join(format(v, ".17g") for v in row))
        lines.append(" ".join(format(v, ".17g") for v in layer.biases))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_weights(net: Network, path) -> None:
    """Load a snapshot into an existing network of identical topology."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    pos = 0
    for idx, layer in enumerate(net.layers):
        header = lines[pos].split()
        pos += 1
        if header[:2] != ["layer", str(idx)]:
            raise ValueError(f"expected 'layer {idx}' header, got {lines[pos - 1]!r}")
        out_size, in_size = int(header[2]), int(header[3])
        if (out_size, in_size) != layer.weights.shape:
            raise ValueError(
                f"layer {idx}: snapshot shape {(out_size, in_size)} != {layer.weights.shape}")
        rows = [np.array(lines[pos + r].split(), dtype=np.float64)
                for r in range(out_size)]
        pos += out_size
        weights = np.vstack(rows)
        biases = np.array(lines[pos].split(), dtype=np.float64)
        pos += 1
        if weights.shape != layer.weights.shape or biases.shape != layer.biases.shape:
            raise ValueError(f"layer {idx}: malformed snapshot rows")
        layer.weights[:] = weights
        layer.biases[:] = biases
    if pos != len(lines):
        raise ValueError("snapshot has trailing content")
