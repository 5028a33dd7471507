"""Flat key=value experiment configuration with dotted namespaces.

Grammar: one `key = value` per line, '#' starts a comment, unknown keys are
errors. Every knob has a documented default so a minimal file needs only
problem, n and model.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import nn
from .dae import DaeConfig
from .errors import ConfigError
from .gan import GanConfig
from .problems import (
    ProblemInstance,
    concat_trap,
    generate_nk_instance,
    hiff,
    load_nk_instance,
    one_max,
)
from .umda import UmdaConfig

DEFAULT_POP_SIZES = (32, 64, 128, 256, 512, 1024)

PROBLEM_KINDS = ("onemax", "trap", "nk", "hiff")
MODEL_KINDS = ("umda", "gan", "dae")


def _parse_int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}") from None


def _parse_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}") from None


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected true/false, got {raw!r}")


def _parse_int_list(raw: str) -> tuple:
    return tuple(_parse_int(part.strip()) for part in raw.split(",") if part.strip())


def _parse_schedule(raw: str) -> nn.Schedule | None:
    """'epoch:multiplier,epoch:multiplier,...' -> piecewise-linear schedule."""
    raw = raw.strip()
    if not raw:
        return None
    points = []
    for part in raw.split(","):
        if ":" not in part:
            raise ConfigError(f"schedule points are epoch:multiplier, got {part!r}")
        e, m = part.split(":", 1)
        points.append((_parse_float(e), _parse_float(m)))
    try:
        return nn.Schedule(tuple(points))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _choice(options):
    def parse(raw: str) -> str:
        if raw not in options:
            raise ConfigError(f"expected one of {', '.join(options)}, got {raw!r}")
        return raw
    return parse


# key -> (parser, default); None default means "required"
_KEYS = {
    "problem": (_choice(PROBLEM_KINDS), None),
    "n": (_parse_int, 0),  # 0: take n from the instance file (nk only)
    "k": (_parse_int, 0),  # 0: per-problem default (trap 5, nk 4)
    "instance": (str, ""),
    "instance_seed": (_parse_int, 7),
    "model": (_choice(MODEL_KINDS), None),
    "pop_sizes": (_parse_int_list, DEFAULT_POP_SIZES),
    "runs": (_parse_int, 20),
    "seed": (_parse_int, 42),
    "truncation": (_parse_float, 0.5),
    "max_generations": (_parse_int, 200),
    "stall_generations": (_parse_int, 30),
    "out": (str, "results"),
    "init.kind": (_choice(("normal", "uniform")), "normal"),
    "init.scale": (_parse_float, 0.01),
    "opt.alpha": (_parse_float, 0.1),
    "opt.momentum": (_parse_float, 0.0),
    "opt.weight_decay": (_parse_float, 0.0),
    "opt.alpha_schedule": (_parse_schedule, None),
    "opt.momentum_schedule": (_parse_schedule, None),
    "opt.decay_schedule": (_parse_schedule, None),
    "gan.z_dim": (_parse_int, 0),  # 0 -> n
    "gan.hidden": (_parse_int, 0),  # 0 -> 2n
    "gan.epochs": (_parse_int, 10),
    "gan.prior": (_choice(("uniform", "normal")), "uniform"),
    "gan.batch_size": (_parse_int, 1),
    "gan.dropout": (_parse_float, 0.0),
    "gan.warm_start": (_parse_bool, False),
    "dae.hidden": (_parse_int, 0),  # 0 -> 2n
    "dae.epochs": (_parse_int, 30),
    "dae.rho": (_parse_float, 0.1),
    "dae.sample_rho": (_parse_float, -1.0),  # -1 -> same as dae.rho
    "dae.chain_steps": (_parse_int, 1),
    "dae.batch_size": (_parse_int, 1),
    "dae.dropout": (_parse_float, 0.0),
    "dae.warm_start": (_parse_bool, False),
}

_PER_PROBLEM_K = {"trap": 5, "nk": 4}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved sweep description."""

    problem: str
    n: int
    k: int | None
    instance_path: str
    instance_seed: int
    model: str
    pop_sizes: tuple
    runs: int
    seed: int
    truncation: float
    max_generations: int
    stall_generations: int
    out: str
    gan: GanConfig
    dae: DaeConfig

    def build_instance(self) -> ProblemInstance:
        try:
            if self.problem == "onemax":
                return one_max(self.n)
            if self.problem == "trap":
                return concat_trap(self.n, self.k)
            if self.problem == "hiff":
                return hiff(self.n)
            if self.instance_path:
                instance = load_nk_instance(self.instance_path)
                if self.n and instance.n != self.n:
                    raise ConfigError(
                        f"instance file has n={instance.n}, config says n={self.n}")
                return instance
            return generate_nk_instance(self.n, self.k, self.instance_seed)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def model_config(self):
        return {"umda": UmdaConfig(), "gan": self.gan, "dae": self.dae}[self.model]


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; errors carry the offending line number."""
    values = {}
    lines = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected key = value, got {raw.strip()!r}")
        key, _, raw_value = line.partition("=")
        key, raw_value = key.strip(), raw_value.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {ln}: duplicate key {key!r} (first on line {lines[key]})")
        parser, _ = _KEYS[key]
        try:
            values[key] = parser(raw_value)
        except ConfigError as exc:
            raise ConfigError(f"line {ln}: {key}: {exc}") from None
        lines[key] = ln

    for key, (_, default) in _KEYS.items():
        if key not in values:
            if default is None and key in ("problem", "model"):
                raise ConfigError(f"missing required key {key!r}")
            values[key] = default

    return _resolve(values)


def _resolve(v: dict) -> ExperimentConfig:
    problem, model = v["problem"], v["model"]
    n = v["n"]
    if n <= 0 and not (problem == "nk" and v["instance"]):
        raise ConfigError("n is required (positive) unless an nk instance file is given")
    k = v["k"] if v["k"] > 0 else _PER_PROBLEM_K.get(problem, 0)
    if not v["pop_sizes"]:
        raise ConfigError("pop_sizes must not be empty")
    if any(s < 2 for s in v["pop_sizes"]):
        raise ConfigError("population sizes must be >= 2")
    if v["runs"] < 1:
        raise ConfigError("runs must be >= 1")
    if not 0.0 < v["truncation"] <= 1.0:
        raise ConfigError(f"truncation must be in (0, 1], got {v['truncation']}")
    if v["max_generations"] < 0 or v["stall_generations"] < 1:
        raise ConfigError("need max_generations >= 0 and stall_generations >= 1")

    try:
        init = nn.InitSpec(v["init.kind"], v["init.scale"])
        optimizer = nn.OptimizerConfig(
            learning_rate=v["opt.alpha"],
            momentum=v["opt.momentum"],
            weight_decay=v["opt.weight_decay"],
            alpha_schedule=v["opt.alpha_schedule"],
            momentum_schedule=v["opt.momentum_schedule"],
            decay_schedule=v["opt.decay_schedule"],
        )
        gan = GanConfig(
            z_dim=v["gan.z_dim"] or None,
            hidden=v["gan.hidden"] or None,
            epochs=v["gan.epochs"],
            prior=v["gan.prior"],
            batch_size=v["gan.batch_size"],
            dropout=v["gan.dropout"],
            init=init,
            optimizer_g=optimizer,
            optimizer_d=optimizer,
            warm_start=v["gan.warm_start"],
        )
        dae = DaeConfig(
            hidden=v["dae.hidden"] or None,
            epochs=v["dae.epochs"],
            rho=v["dae.rho"],
            sample_rho=None if v["dae.sample_rho"] < 0 else v["dae.sample_rho"],
            chain_steps=v["dae.chain_steps"],
            batch_size=v["dae.batch_size"],
            dropout=v["dae.dropout"],
            init=init,
            optimizer=optimizer,
            warm_start=v["dae.warm_start"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    if v["gan.epochs"] < 0 or v["dae.epochs"] < 0:
        raise ConfigError("epochs must be >= 0")

    return ExperimentConfig(
        problem=problem,
        n=n,
        k=k if problem in _PER_PROBLEM_K else None,
        instance_path=v["instance"],
        instance_seed=v["instance_seed"],
        model=model,
        pop_sizes=tuple(v["pop_sizes"]),
        runs=v["runs"],
        seed=v["seed"],
        truncation=v["truncation"],
        max_generations=v["max_generations"],
        stall_generations=v["stall_generations"],
        out=v["out"],
        gan=gan,
        dae=dae,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
