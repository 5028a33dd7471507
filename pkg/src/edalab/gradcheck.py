"""Finite-difference verification of backprop, including the composed
generator-through-discriminator path.

Central differences with step h; relative error uses a small floor so
near-zero gradients are compared absolutely. Configurations that land a
relu pre-activation within the kink margin are redrawn: finite differences
are invalid at non-differentiable points, not the gradient code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn

DEFAULT_H = 1e-5
DEFAULT_TOLERANCE = 1e-4
_ERROR_FLOOR = 1e-3
_KINK_MARGIN = 1e-3


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = _ERROR_FLOOR) -> float:
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float((np.abs(a - b) / denom).max()) if a.size else 0.0


def _loss_and_grad(net: nn.Network, x: np.ndarray, targets: np.ndarray):
    trace = nn.forward(net, x, mode="train")
    y = trace.output
    if net.layers[-1].activation == "sigmoid":
        loss = float(nn.cross_entropy(y, targets).sum())
        out_grad = nn.cross_entropy_grad(y, targets)
    else:
        loss = float(0.5 * ((y - targets) ** 2).sum())
        out_grad = y - targets
    return loss, trace, out_grad


def _fd_gradient(param: np.ndarray, loss_of_state, h: float) -> np.ndarray:
    grad = np.zeros_like(param)
    flat, gflat = param.ravel(), grad.ravel()
    for i in range(flat.size):
        saved = flat[i]
        flat[i] = saved + h
        up = loss_of_state()
        flat[i] = saved - h
        down = loss_of_state()
        flat[i] = saved
        gflat[i] = (up - down) / (2.0 * h)
    return grad


def check_network(net: nn.Network, x: np.ndarray, targets: np.ndarray,
                  h: float = DEFAULT_H) -> float:
    """Max relative error between backprop and finite differences."""
    _, trace, out_grad = _loss_and_grad(net, x, targets)
    analytic = nn.backward(net, trace, out_grad)
    worst = 0.0
    for layer, (dw, db) in zip(net.layers, analytic.layers):
        for param, got in ((layer.weights, dw), (layer.biases, db)):
            fd = _fd_gradient(param, lambda: _loss_and_grad(net, x, targets)[0], h)
            worst = max(worst, relative_error(got, fd))
    fd_input = _fd_gradient(x, lambda: _loss_and_grad(net, x, targets)[0], h)
    worst = max(worst, relative_error(analytic.input_gradient, fd_input))
    return worst


def _relu_margins(net: nn.Network, x: np.ndarray) -> float:
    trace = nn.forward(net, x, mode="train")
    margin = np.inf
    for layer, z in zip(net.layers, trace.pre_activations):
        if layer.activation == "relu":
            margin = min(margin, float(np.abs(z).min()))
    return margin


def _draw_config(rng: np.random.Generator):
    depth = int(rng.integers(1, 4))
    sizes = [int(rng.integers(1, 9)) for _ in range(depth + 1)]
    activations = [str(rng.choice(["sigmoid", "relu", "linear"])) for _ in range(depth)]
    for _ in range(50):
        net = nn.init_network(sizes, activations, nn.InitSpec("normal", 0.5), rng)
        batch = int(rng.integers(1, 5))
        x = rng.uniform(-1.0, 1.0, (batch, sizes[0]))
        if _relu_margins(net, x) > _KINK_MARGIN:
            break
    if net.layers[-1].activation == "sigmoid":
        targets = rng.integers(0, 2, (batch, sizes[-1])).astype(np.float64)
    else:
        targets = rng.uniform(-1.0, 1.0, (batch, sizes[-1]))
    return net, x, targets


def generator_loss_through_discriminator(gen: nn.Network, disc: nn.Network,
                                         z: np.ndarray) -> float:
    samples = nn.forward(gen, z, mode="train").output
    y = nn.forward(disc, samples, mode="train").output
    yc = np.clip(y, nn.PROB_EPS, 1.0 - nn.PROB_EPS)
    return float(np.log1p(-yc).sum())


def check_composed_generator(h: float = DEFAULT_H, seed: int = 99) -> float:
    """Gradient of log(1 - D(G(z))) w.r.t. generator parameters only."""
    rng = np.random.default_rng(seed)
    n, z_dim, hidden = 6, 4, 5
    for _ in range(50):
        gen = nn.init_network([z_dim, hidden, n], ["relu", "sigmoid"],
                              nn.InitSpec("normal", 0.5), rng)
        disc = nn.init_network([n, hidden, 1], ["relu", "sigmoid"],
                               nn.InitSpec("normal", 0.5), rng)
        z = rng.uniform(0.0, 1.0, (2, z_dim))
        gen_trace = nn.forward(gen, z, mode="train")
        disc_trace = nn.forward(disc, gen_trace.output, mode="train")
        if (_relu_margins(gen, z) > _KINK_MARGIN
                and _relu_margins(disc, gen_trace.output) > _KINK_MARGIN):
            break
    yc = np.clip(disc_trace.output, nn.PROB_EPS, 1.0 - nn.PROB_EPS)
    disc_grads = nn.backward(disc, disc_trace, -1.0 / (1.0 - yc), param_grads=False)
    gen_grads = nn.backward(gen, gen_trace, disc_grads.input_gradient)

    worst = 0.0
    for layer, (dw, db) in zip(gen.layers, gen_grads.layers):
        for param, got in ((layer.weights, dw), (layer.biases, db)):
            fd = _fd_gradient(
                param, lambda: generator_loss_through_discriminator(gen, disc, z), h)
            worst = max(worst, relative_error(got, fd))
    return worst


@dataclass
class GradCheckReport:
    per_config: list
    composed_error: float
    tolerance: float

    @property
    def worst(self) -> float:
        return max(max(self.per_config), self.composed_error)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"gradcheck {status}: {len(self.per_config)} configurations, "
                f"worst relative error {self.worst:.3e} "
                f"(composed path {self.composed_error:.3e}, tolerance {self.tolerance:g})")


def run_suite(num_configs: int = 100, seed: int = 2024,
              tolerance: float = DEFAULT_TOLERANCE) -> GradCheckReport:
    rng = np.random.default_rng(seed)
    errors = []
    for _ in range(num_configs):
        net, x, targets = _draw_config(rng)
        errors.append(check_network(net, x, targets))
    composed = check_composed_generator()
    return GradCheckReport(errors, composed, tolerance)
