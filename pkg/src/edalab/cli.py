"""Command-line surface: run sweeps, verify NK files, generate instances,
check gradients.

Exit codes: 0 success, 1 configuration/usage error, 2 sweep had failed
runs, 3 verification mismatch.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import gradcheck
from .errors import CapacityError, ConfigError, InstanceFormatError
from .expconfig import load_config
from .harness import run_sweep, verify_instance, write_aggregate_csv, write_run_csv
from .problems import generate_nk_instance, save_nk_instance

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUN_FAILURES = 2
EXIT_VERIFY_MISMATCH = 3


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        out_dir = Path(args.out if args.out else config.out)
        result = run_sweep(config, jobs=args.jobs)
    except (ConfigError, InstanceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir.mkdir(parents=True, exist_ok=True)
    write_run_csv(result.rows, out_dir / "runs.csv")
    write_aggregate_csv(result.aggregates, out_dir / "aggregate.csv")
    for agg in result.aggregates:
        print(f"{agg.model} {agg.problem} N={agg.pop_size}: "
              f"mean best {agg.mean_best_fitness:.4g}, "
              f"success {agg.success_fraction:.0%}, "
              f"mean unique evals {agg.mean_unique_evals:.4g}")
    print(f"wrote {out_dir / 'runs.csv'} and {out_dir / 'aggregate.csv'}")
    if result.failures:
        print(f"error: {result.failures} runs failed", file=sys.stderr)
        return EXIT_RUN_FAILURES
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        report = verify_instance(args.instance)
    except (InstanceFormatError, CapacityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(report.summary())
    if report.match is False:
        return EXIT_VERIFY_MISMATCH
    return EXIT_OK


def _cmd_gen_nk(args) -> int:
    try:
        instance = generate_nk_instance(args.n, args.k, args.seed)
        save_nk_instance(instance, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    note = ("" if instance.known_optimum is None
            else f" (optimum {instance.known_optimum:.6g})")
    print(f"wrote nk n={args.n} k={args.k} seed={args.seed} to {args.out}{note}")
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    report = gradcheck.run_suite(num_configs=args.configs, seed=args.seed)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edalab",
        description="EDA experiments with adversarial, autoencoder and marginal models")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a sweep from a config file")
    run_p.add_argument("--config", required=True, help="key=value config file")
    run_p.add_argument("--out", default="", help="output directory (default: config's out)")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run_p.set_defaults(func=_cmd_run)

    verify_p = sub.add_parser("verify", help="brute-force check an nk instance file")
    verify_p.add_argument("--instance", required=True)
    verify_p.set_defaults(func=_cmd_verify)

    gen_p = sub.add_parser("gen-nk", help="generate a random nk instance file")
    gen_p.add_argument("--n", type=int, required=True)
    gen_p.add_argument("--k", type=int, required=True)
    gen_p.add_argument("--seed", type=int, required=True)
    gen_p.add_argument("--out", required=True)
    gen_p.set_defaults(func=_cmd_gen_nk)

    grad_p = sub.add_parser("gradcheck", help="finite-difference gradient suite")
    grad_p.add_argument("--configs", type=int, default=100)
    grad_p.add_argument("--seed", type=int, default=2024)
    grad_p.set_defaults(func=_cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
