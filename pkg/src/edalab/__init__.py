"""EDA laboratory: adversarial, denoising-autoencoder and univariate
marginal models over bit-string benchmarks, plus a sweep harness."""

from .dae import DaeConfig, DaeModel
from .eda import EdaConfig, RunRecord, run_eda, select_truncation
from .expconfig import ExperimentConfig, load_config, parse_config
from .gan import GanConfig, GanModel
from .harness import run_sweep, verify_instance
from .problems import (
    ProblemInstance,
    brute_force_optimum,
    concat_trap,
    evaluate,
    evaluate_batch,
    generate_nk_instance,
    hiff,
    load_nk_instance,
    one_max,
    save_nk_instance,
)
from .umda import MarginalModel, UmdaConfig

__all__ = [
    "DaeConfig", "DaeModel", "EdaConfig", "ExperimentConfig", "GanConfig",
    "GanModel", "MarginalModel", "ProblemInstance", "RunRecord", "UmdaConfig",
    "brute_force_optimum", "concat_trap", "evaluate", "evaluate_batch",
    "generate_nk_instance", "hiff", "load_config", "load_nk_instance",
    "one_max", "parse_config", "run_eda", "run_sweep", "save_nk_instance",
    "select_truncation", "verify_instance",
]
