"""Monte Carlo reproductions comparing the finest sampler with a pairwise one.

Trials run on a thread pool through the event loop, numpy releases the GIL in
the block products. Each harness writes its artifact to the configured output
directory and returns the rows it wrote.
"""
import asyncio
import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from math import sqrt
from pathlib import Path
from typing import Any, Awaitable, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import attr
import numpy as np

from ..analysis import expected_frobenius_error_sq
from ..distributions import (
    SamplingDistribution,
    aggregate_distribution,
    distribution_statistics,
    finest_distribution,
)
from ..matrix import DenseMatrix, frobenius_norm, load_matrix, multiply, spectral_norm
from ..partition import Partition, PairingStrategy, pair_partition
from ..sketch import SketchConfig, sketch
from ..streams import FIG1_STREAM, FIG2_STREAM, derive_seed, standard_uniform_matrix
from .config import FINEST, ExperimentConfig
from .output import csv_text, ensure_dir, write_json, write_text

__all__ = [
    "FIG1_HEADER",
    "FIG2_HEADER",
    "Fig1Row",
    "Fig2Row",
    "MethodPlan",
    "Workload",
    "frobenius_trial",
    "load_operand",
    "prepare_workload",
    "run_fig1",
    "run_fig2",
    "run_table1",
    "spectral_trial",
]

logger = logging.getLogger(__name__)

T = TypeVar("T")

FIG1_HEADER = ("c", "method", "mean_rel_frob_err", "mean_sq_frob_err", "stderr", "trials")
FIG2_HEADER = ("method", "c", "run", "rel_2norm_err")


@attr.dataclass(frozen=True, slots=True, eq=False)
class MethodPlan:
    name: str
    partition: Partition
    distribution: SamplingDistribution


@attr.dataclass(frozen=True, slots=True, eq=False)
class Workload:
    """The operands A and B = A^T with their exact product and the compared methods"""

    a: DenseMatrix
    b: DenseMatrix
    product: DenseMatrix
    product_frobenius: float
    product_spectral: float
    methods: Tuple[MethodPlan, ...]


@attr.dataclass(frozen=True, slots=True)
class Fig1Row:
    c: int
    method: str
    mean_rel_frob_err: float
    mean_sq_frob_err: float
    stderr: float
    trials: int
    sq_stderr: float
    expected_sq_frob_err: float

    def csv_row(self) -> Tuple[Any, ...]:
        return self.c, self.method, self.mean_rel_frob_err, self.mean_sq_frob_err, self.stderr, self.trials


@attr.dataclass(frozen=True, slots=True)
class Fig2Row:
    method: str
    c: int
    run: int
    rel_2norm_err: float

    def csv_row(self) -> Tuple[Any, ...]:
        return self.method, self.c, self.run, self.rel_2norm_err


def load_operand(config: ExperimentConfig) -> DenseMatrix:
    """The configured matrix file or a standard uniform rows x cols matrix"""
    if config.matrix_path is not None:
        return load_matrix(config.matrix_path)
    return standard_uniform_matrix(config.rows, config.cols, config.seed)


def prepare_workload(config: ExperimentConfig, strategy: Optional[PairingStrategy] = None) -> Workload:
    """Builds the operands and the finest plan plus the pairwise plan, when any.

    :param config: The experiment settings
    :param strategy: Overrides the configured pairing
    :return: The workload shared by every trial
    """
    a = load_operand(config)
    b = a.T
    product = multiply(a, b)
    p_finest = finest_distribution(a, b)
    methods = [MethodPlan(FINEST, p_finest.support, p_finest)]
    strategy = strategy or config.pairing()
    if strategy is not None:
        pairs = pair_partition(p_finest, strategy)
        methods.append(MethodPlan(strategy.label, pairs, aggregate_distribution(p_finest, pairs)))
    return Workload(
        a=a,
        b=b,
        product=product,
        product_frobenius=frobenius_norm(product),
        product_spectral=spectral_norm(product),
        methods=tuple(methods),
    )


def _error(work: Workload, plan: MethodPlan, c: int, seed: int) -> DenseMatrix:
    result = sketch(work.a, work.b, plan.partition, plan.distribution, SketchConfig(c, seed))
    return DenseMatrix(work.product.values - result.estimate.values)


def frobenius_trial(work: Workload, plan: MethodPlan, c: int, seed: int) -> Tuple[float, float]:
    """Returns the relative and the squared Frobenius error of one sketch"""
    error = frobenius_norm(_error(work, plan, c, seed))
    return error / work.product_frobenius, error * error


def spectral_trial(work: Workload, plan: MethodPlan, c: int, seed: int) -> float:
    return spectral_norm(_error(work, plan, c, seed)) / work.product_spectral


async def _gather(executor: Executor, fn: Callable[..., T], calls: Sequence[Tuple[Any, ...]]) -> List[T]:
    loop = asyncio.get_running_loop()
    futures: List[Awaitable[T]] = [loop.run_in_executor(executor, fn, *args) for args in calls]
    return list(await asyncio.gather(*futures))


def _stderr(samples: np.ndarray) -> float:
    if len(samples) < 2:
        return 0.0
    return float(np.std(samples, ddof=1)) / sqrt(len(samples))


class _Pool:
    """Uses the given executor or owns a thread pool for the duration of a run"""

    __slots__ = ["executor", "owned"]

    def __init__(self, executor: Optional[Executor], workers: int) -> None:
        self.owned = executor is None
        self.executor = executor or ThreadPoolExecutor(max_workers=workers)

    def __enter__(self) -> Executor:
        return self.executor

    def __exit__(self, *args: Any) -> None:
        if self.owned:
            self.executor.shutdown(wait=True)


async def run_fig1(config: ExperimentConfig, executor: Optional[Executor] = None) -> List[Fig1Row]:
    """Mean Frobenius error against c for the finest and the pairwise sampler.

    Writes fig1.csv into config.out_dir.
    """
    work = prepare_workload(config)
    rows: List[Fig1Row] = []
    with _Pool(executor, config.workers) as pool:
        for grid, c in enumerate(config.c_grid):
            seeds = [derive_seed(config.seed, FIG1_STREAM, grid, t) for t in range(config.trials)]
            for plan in work.methods:
                samples = np.array(
                    await _gather(pool, frobenius_trial, [(work, plan, c, s) for s in seeds])
                )
                rel, sq = samples[:, 0], samples[:, 1]
                rows.append(
                    Fig1Row(
                        c=c,
                        method=plan.name,
                        mean_rel_frob_err=float(np.mean(rel)),
                        mean_sq_frob_err=float(np.mean(sq)),
                        stderr=_stderr(rel),
                        trials=config.trials,
                        sq_stderr=_stderr(sq),
                        expected_sq_frob_err=expected_frobenius_error_sq(
                            work.a, work.b, plan.partition, plan.distribution, c
                        ),
                    )
                )
                logger.info(
                    "fig1 c=%d %s mean relative error %.6g over %d trials",
                    c, plan.name, rows[-1].mean_rel_frob_err, config.trials,
                )
    out_dir = ensure_dir(config.out_dir)
    await write_text(out_dir / "fig1.csv", csv_text(FIG1_HEADER, (r.csv_row() for r in rows)))
    return rows


async def run_fig2(config: ExperimentConfig, executor: Optional[Executor] = None) -> List[Fig2Row]:
    """Per run relative spectral errors at the fig2 draw counts, written to fig2.csv"""
    work = prepare_workload(config)
    rows: List[Fig2Row] = []
    with _Pool(executor, config.workers) as pool:
        for grid, c in enumerate(config.fig2_sizes_for(work.a.cols)):
            seeds = [derive_seed(config.seed, FIG2_STREAM, grid, r) for r in range(config.runs)]
            for plan in work.methods:
                errors = await _gather(pool, spectral_trial, [(work, plan, c, s) for s in seeds])
                rows.extend(Fig2Row(plan.name, c, run, err) for run, err in enumerate(errors, start=1))
                logger.info(
                    "fig2 c=%d %s median relative spectral error %.6g over %d runs",
                    c, plan.name, float(np.median(errors)), config.runs,
                )
    out_dir = ensure_dir(config.out_dir)
    await write_text(out_dir / "fig2.csv", csv_text(FIG2_HEADER, (r.csv_row() for r in rows)))
    return rows


def _table1(config: ExperimentConfig) -> Dict[str, Any]:
    a = load_operand(config)
    p_finest = finest_distribution(a, a.T)
    strategy = config.pairing() or PairingStrategy.enhanced()
    p_pair = aggregate_distribution(p_finest, pair_partition(p_finest, strategy))
    return {
        "cols": a.cols,
        "p_finest": distribution_statistics(p_finest),
        "p_pair": distribution_statistics(p_pair),
        "rows": a.rows,
        "strategy": str(strategy),
    }


async def run_table1(config: ExperimentConfig, executor: Optional[Executor] = None) -> Dict[str, Any]:
    """Max, mean and min of the finest and the paired probabilities, written to table1.json"""
    with _Pool(executor, 1) as pool:
        table = await asyncio.get_running_loop().run_in_executor(pool, _table1, config)
    out_dir = ensure_dir(config.out_dir)
    await write_json(Path(out_dir) / "table1.json", table)
    return table
