"""Command line entry point.

partsketch sketch ...            one sketch of AB with its draw log and bounds
partsketch analyze ...           expected errors, tail bounds and draw thresholds
partsketch experiment fig1 ...   mean Frobenius error against c
partsketch experiment fig2 ...   per run relative spectral errors
partsketch experiment table1 ... probability statistics of both samplers

Exit codes: 0 success, 1 bad configuration, 2 I/O failure, 3 numeric failure.
"""
import argparse
import asyncio
import logging
import os
import sys
from typing import Any, Dict, NoReturn, Optional, Sequence

import attr

from .analysis import ThresholdRule
from .codec import dumps
from .errors import ConfigError
from .experiment.adhoc import DISTRIBUTION_CHOICES, AdhocOptions, run_analyze, run_sketch
from .experiment.config import STRATEGY_CHOICES, ExperimentConfig
from .experiment.runner import run_fig1, run_fig2, run_table1

__all__ = ["EXIT_CONFIG", "EXIT_IO", "EXIT_NUMERIC", "EXIT_OK", "build_parser", "main"]

logger = logging.getLogger("partsketch")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERIC = 3

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise ConfigError(message)


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--seed",
        type=int,
        default=_env_int("PARTSKETCH_SEED", 0),
        help="Master seed, 0..2^64-1 (env PARTSKETCH_SEED)",
    )
    common.add_argument(
        "--log-level",
        type=str.upper,
        choices=LOG_LEVELS,
        default=os.getenv("PARTSKETCH_LOG_LEVEL", "WARNING").upper(),
        help="Logging level (env PARTSKETCH_LOG_LEVEL)",
    )
    common.add_argument("--rows", type=int, default=None, help="Rows of the generated matrix A")
    common.add_argument("--cols", type=int, default=None, help="Columns of the generated matrix A")
    common.add_argument("--strategy", choices=STRATEGY_CHOICES, default=None, help="Pairing strategy or finest")
    common.add_argument("--out-dir", default=None, help="Directory receiving the artifacts")

    adhoc = _Parser(add_help=False)
    adhoc.add_argument("--a", dest="a_path", default=None, help="Matrix A as CSV or .bin")
    adhoc.add_argument("--b", dest="b_path", default=None, help="Matrix B, defaults to A transposed")
    adhoc.add_argument("--c", type=int, default=100, help="Number of draws")
    adhoc.add_argument("--partition-file", default=None, help="JSON partition with 1-based indices")
    adhoc.add_argument("--distribution", choices=DISTRIBUTION_CHOICES, default=None)
    adhoc.add_argument("--epsilon", type=float, default=None, help="Spectral error level of the tail bound")
    adhoc.add_argument("--threshold-c", type=int, default=None)
    adhoc.add_argument("--threshold-k", type=int, default=None)
    adhoc.add_argument(
        "--threshold-rule",
        choices=[r.value for r in ThresholdRule],
        default=ThresholdRule.PER_GROUP.value,
    )

    experiment = _Parser(add_help=False)
    experiment.add_argument("--c-min", type=int, default=None)
    experiment.add_argument("--c-max", type=int, default=None)
    experiment.add_argument("--c-step", type=int, default=None)
    experiment.add_argument("--trials", type=int, default=None, help="Trials per c (fig1)")
    experiment.add_argument("--runs", type=int, default=None, help="Runs per c (fig2)")
    experiment.add_argument("--fig2-c", type=int, nargs="+", default=None, help="Draw counts of fig2")
    experiment.add_argument("--matrix", dest="matrix_path", default=None, help="Matrix A as CSV or .bin")
    experiment.add_argument("--paper-scale", action="store_true", help="Full size runs")
    experiment.add_argument(
        "--workers",
        type=int,
        default=_env_int("PARTSKETCH_WORKERS", 4),
        help="Worker threads (env PARTSKETCH_WORKERS)",
    )

    parser = _Parser(prog="partsketch", description="Partition based randomized matrix multiplication")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("sketch", parents=[common, adhoc], help="Sketch AB once")
    commands.add_parser("analyze", parents=[common, adhoc], help="Expected errors and bounds")
    experiments = commands.add_parser("experiment", help="Monte Carlo reproductions")
    which = experiments.add_subparsers(dest="experiment", required=True)
    for name in ("fig1", "fig2", "table1"):
        which.add_parser(name, parents=[common, experiment])
    return parser


def _given(args: argparse.Namespace, *names: str) -> Dict[str, Any]:
    return {name: getattr(args, name) for name in names if getattr(args, name) is not None}


def experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    """Preset (desk or paper scale) overridden by every flag given explicitly"""
    overrides = _given(
        args, "rows", "cols", "c_min", "c_max", "c_step", "trials", "runs",
        "strategy", "out_dir", "matrix_path", "fig2_c",
    )
    overrides.update(seed=args.seed, workers=args.workers)
    if args.paper_scale:
        return ExperimentConfig.paper_scale(**overrides)
    return ExperimentConfig.desk(**overrides)


def adhoc_options(args: argparse.Namespace) -> AdhocOptions:
    defaults = attr.asdict(AdhocOptions(), recurse=False)
    defaults.update(_given(args, "rows", "cols", "strategy", "out_dir"))
    defaults.update(
        a_path=args.a_path,
        b_path=args.b_path,
        seed=args.seed,
        c=args.c,
        partition_file=args.partition_file,
        distribution=args.distribution,
        epsilon=args.epsilon,
        threshold_c=args.threshold_c,
        threshold_k=args.threshold_k,
        threshold_rule=args.threshold_rule,
    )
    return AdhocOptions(**defaults)


async def _dispatch(args: argparse.Namespace) -> Any:
    if args.command == "sketch":
        summary = await run_sketch(adhoc_options(args))
        return summary["bounds"]
    if args.command == "analyze":
        return await run_analyze(adhoc_options(args))
    config = experiment_config(args)
    if args.experiment == "fig1":
        rows = await run_fig1(config)
        return [attr.asdict(row) for row in rows]
    if args.experiment == "fig2":
        fig2_rows = await run_fig2(config)
        sizes = list(dict.fromkeys(row.c for row in fig2_rows))
        return {"out_dir": str(config.out_dir), "runs": config.runs, "c": sizes}
    return await run_table1(config)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Runs the command line and returns the exit code"""
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=args.log_level, format="%(asctime)s %(name)s %(levelname)s %(message)s"
        )
        output = asyncio.run(_dispatch(args))
    except ArithmeticError as e:
        print(f"partsketch: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"partsketch: I/O failure: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"partsketch: {e}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(dumps(output))
    return EXIT_OK
