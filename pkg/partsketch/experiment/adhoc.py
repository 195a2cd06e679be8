"""Single sketch and analysis runs on user supplied or generated operands."""
import asyncio
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import attr

from ..analysis import (
    ThresholdRule,
    bernstein_tail_bound,
    bound_report,
    comparator_tail_bounds,
    expected_frobenius_error_sq,
    min_draw_threshold,
    optimal_expected_error,
    pairing_comparators,
    relative_errors,
    uniform_spectral_bound,
)
from ..distributions import (
    SamplingDistribution,
    aggregate_distribution,
    distribution_statistics,
    finest_distribution,
    optimal_distribution,
    uniform_distribution,
)
from ..errors import ConfigError, create_dimension_error
from ..matrix import DenseMatrix, load_matrix, multiply
from ..partition import Partition, PairingStrategy, finest, load_partition, pair_partition
from ..sketch import SketchConfig, draw_log, sketch
from ..streams import ADHOC_STREAM, PAIRING_STREAM, check_seed, derive_seed, standard_uniform_matrix
from .config import FINEST, STRATEGY_CHOICES
from .output import ensure_dir, write_json, write_matrix

__all__ = [
    "DISTRIBUTION_CHOICES",
    "AdhocOptions",
    "analyze",
    "load_operands",
    "run_analyze",
    "run_sketch",
    "select_plan",
]

logger = logging.getLogger(__name__)

DISTRIBUTION_CHOICES = ("optimal", "aggregated", "uniform")


def _optional_path(value: Any) -> Optional[Path]:
    return None if value is None else Path(value)


@attr.dataclass(frozen=True, slots=True)
class AdhocOptions:
    """Options of the sketch and analyze commands.

    Without a_path a standard uniform rows x cols matrix is generated, without
    b_path B is the transpose of A. distribution defaults to aggregated for
    pairings and to optimal otherwise.
    """

    a_path: Optional[Path] = attr.ib(default=None, converter=_optional_path)
    b_path: Optional[Path] = attr.ib(default=None, converter=_optional_path)
    rows: int = 50
    cols: int = 500
    seed: int = 0
    c: int = 100
    strategy: str = "enhanced"
    partition_file: Optional[Path] = attr.ib(default=None, converter=_optional_path)
    distribution: Optional[str] = None
    out_dir: Path = attr.ib(default=Path("results"), converter=Path)
    epsilon: Optional[float] = None
    threshold_c: Optional[int] = None
    threshold_k: Optional[int] = None
    threshold_rule: ThresholdRule = attr.ib(default=ThresholdRule.PER_GROUP, converter=ThresholdRule)

    def __attrs_post_init__(self) -> None:
        check_seed(self.seed)
        if self.c < 1:
            raise ConfigError(f"c must be positive, got {self.c}")
        if self.strategy not in STRATEGY_CHOICES:
            raise ConfigError(f"strategy must be one of {', '.join(STRATEGY_CHOICES)}, got {self.strategy!r}")
        if self.distribution is not None and self.distribution not in DISTRIBUTION_CHOICES:
            raise ConfigError(
                f"distribution must be one of {', '.join(DISTRIBUTION_CHOICES)}, got {self.distribution!r}"
            )
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if (self.threshold_c is None) != (self.threshold_k is None):
            raise ConfigError("threshold_c and threshold_k go together")

    def pairing(self) -> Optional[PairingStrategy]:
        if self.partition_file is not None or self.strategy == FINEST:
            return None
        seed = derive_seed(self.seed, PAIRING_STREAM) if self.strategy == "random" else None
        return PairingStrategy.parse(self.strategy, seed)


def load_operands(options: AdhocOptions) -> Tuple[DenseMatrix, DenseMatrix]:
    if options.a_path is not None:
        a = load_matrix(options.a_path)
    else:
        a = standard_uniform_matrix(options.rows, options.cols, options.seed)
    b = load_matrix(options.b_path) if options.b_path is not None else a.T
    if a.cols != b.rows:
        raise create_dimension_error("operands", a.shape, b.shape)
    return a, b


def select_plan(a: DenseMatrix, b: DenseMatrix, options: AdhocOptions) -> Tuple[Partition, SamplingDistribution]:
    """Resolves the partition and the distribution the options ask for"""
    strategy = options.pairing()
    if options.partition_file is not None:
        partition = load_partition(options.partition_file, a.cols)
    elif strategy is None:
        partition = finest(a.cols)
    else:
        partition = pair_partition(finest_distribution(a, b), strategy)
    kind = options.distribution or ("aggregated" if strategy is not None else "optimal")
    if kind == "uniform":
        return partition, uniform_distribution(partition)
    if kind == "optimal":
        return partition, optimal_distribution(a, b, partition)
    return partition, aggregate_distribution(finest_distribution(a, b), partition)


def analyze(options: AdhocOptions) -> Dict[str, Any]:
    """Collects the expected errors and bounds of the selected plan"""
    a, b = load_operands(options)
    partition, dist = select_plan(a, b, options)
    report = bound_report(a, b, partition, dist)
    analysis: Dict[str, Any] = {
        "c": options.c,
        "distribution": distribution_statistics(dist),
        "expected_sq_frob_err": expected_frobenius_error_sq(a, b, partition, dist, options.c),
        "finest_optimal_sq_frob_err": optimal_expected_error(a, b, finest(a.cols), options.c),
        "groups": partition.k,
        "optimal_sq_frob_err": optimal_expected_error(a, b, partition, options.c),
        "report": report.to_json(),
    }
    if options.epsilon is not None:
        analysis["epsilon"] = options.epsilon
        analysis["tail_bound"] = bernstein_tail_bound(report, options.c, options.epsilon)
    if not partition.is_finest and all(len(g) <= 2 for g in partition.groups):
        comparators = pairing_comparators(a, b, partition)
        analysis["comparators"] = comparators._asdict()
        if options.epsilon is not None:
            finest_bound, paired_bound = comparator_tail_bounds(
                comparators, a.rows, b.cols, options.c, options.epsilon
            )
            analysis["comparator_tail_bounds"] = {"finest": finest_bound, "paired": paired_bound}
    if options.threshold_c is not None and options.threshold_k is not None:
        threshold = min_draw_threshold(options.threshold_c, options.threshold_k, options.threshold_rule)
        analysis["threshold"] = threshold.to_json()
        if threshold.s_c is not None:
            analysis["uniform_spectral_bound"] = uniform_spectral_bound(
                a, b, threshold.c, threshold.k, threshold.s_c
            )
    return analysis


async def run_analyze(options: AdhocOptions) -> Dict[str, Any]:
    """Runs :func:`analyze` off the event loop and writes analysis.json"""
    analysis = await asyncio.get_running_loop().run_in_executor(None, analyze, options)
    await write_json(ensure_dir(options.out_dir) / "analysis.json", analysis)
    return analysis


async def run_sketch(options: AdhocOptions) -> Dict[str, Any]:
    """One sketch of AB, writes estimate.csv, product.csv, draws.json and bounds.json"""
    loop = asyncio.get_running_loop()
    a, b = await loop.run_in_executor(None, load_operands, options)
    partition, dist = await loop.run_in_executor(None, select_plan, a, b, options)
    config = SketchConfig(options.c, derive_seed(options.seed, ADHOC_STREAM))
    result = await loop.run_in_executor(None, sketch, a, b, partition, dist, config)
    product = multiply(a, b)
    rel_frobenius, rel_spectral = relative_errors(product, result.estimate)
    report = bound_report(a, b, partition, dist)
    bounds: Dict[str, Any] = {
        "expected_sq_frob_err": expected_frobenius_error_sq(a, b, partition, dist, options.c),
        "rel_2norm_err": rel_spectral,
        "rel_frob_err": rel_frobenius,
        "report": report.to_json(),
    }
    if options.epsilon is not None:
        bounds["epsilon"] = options.epsilon
        bounds["tail_bound"] = bernstein_tail_bound(report, options.c, options.epsilon)
    out_dir = ensure_dir(options.out_dir)
    await asyncio.gather(
        write_matrix(out_dir / "estimate.csv", result.estimate),
        write_matrix(out_dir / "product.csv", product),
        write_json(out_dir / "draws.json", draw_log(result)),
        write_json(out_dir / "bounds.json", bounds),
    )
    return {"bounds": bounds, "draws": draw_log(result), "out_dir": str(out_dir)}
