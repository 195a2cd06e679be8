"""Partition based randomized matrix multiplication.

c groups are drawn i.i.d. from a distribution on a partition of the inner
indices, and each draw contributes its rescaled block product to the estimate
of AB. The estimate is accumulated per group in ascending group order, with
weight (times drawn) / (c p_l), so the per-group contributions sum exactly to it.
"""
import logging
from typing import Any, Dict, Sequence

import attr
import numpy as np

from .distributions import SamplingDistribution, aggregate_distribution, optimal_distribution
from .errors import ConfigError, DistributionError, PartitionError, create_dimension_error
from .matrix import DenseMatrix, _block
from .partition import Partition, PairingStrategy, ensure_valid, finest, pair_partition, partition_to_json
from .streams import check_seed, draw_uniforms

__all__ = [
    "SketchConfig",
    "SketchResult",
    "draw_log",
    "element_contribution",
    "sample_indices",
    "sketch",
    "sketch_finest",
    "sketch_pairwise",
]

logger = logging.getLogger(__name__)


def _positive(instance: Any, attribute: "attr.Attribute[int]", value: int) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise ConfigError(f"{attribute.name} must be a positive integer, got {value!r}")


def _seed(instance: Any, attribute: "attr.Attribute[int]", value: int) -> None:
    check_seed(value)


@attr.dataclass(frozen=True, slots=True)
class SketchConfig:
    """Number of draws c and the seed of the draw stream"""

    c: int = attr.ib(validator=_positive)
    seed: int = attr.ib(default=0, validator=_seed)


def _readonly_ints(values: Any) -> np.ndarray:
    array = np.array(values, dtype=np.int64, copy=True)
    array.setflags(write=False)
    return array


@attr.dataclass(frozen=True, slots=True, eq=False)
class SketchResult:
    """The estimate of AB together with everything needed to reproduce it.

    draws holds the 0-based group drawn at every step, counts[l] how often
    group l was drawn.
    """

    estimate: DenseMatrix
    draws: np.ndarray = attr.ib(converter=_readonly_ints)
    counts: np.ndarray = attr.ib(converter=_readonly_ints)
    seed: int
    partition: Partition
    distribution: SamplingDistribution

    def __attrs_post_init__(self) -> None:
        if len(self.counts) != self.partition.k or int(self.counts.sum()) != len(self.draws):
            raise DistributionError("Draw counts do not match the draws")

    @property
    def c(self) -> int:
        return len(self.draws)


def sample_indices(dist: SamplingDistribution, c: int, seed: int) -> np.ndarray:
    """Draws c group indices i.i.d. from dist by inverse CDF.

    The i-th draw only depends on (seed, i), so the first j draws for a given seed
    do not depend on c. Groups of probability zero are never drawn.

    :param dist: The sampling distribution
    :param c: Number of draws
    :param seed: 64-bit seed of the draw stream
    :return: 0-based group indices
    """
    if c < 1:
        raise ConfigError(f"c must be a positive integer, got {c!r}")
    cumulative = np.cumsum(dist.weights)
    uniforms = draw_uniforms(seed, c) * cumulative[-1]
    draws = np.searchsorted(cumulative, uniforms, side="right")
    last = int(np.flatnonzero(dist.weights)[-1])
    return np.minimum(draws, last)


def _scaled_block(
    a: np.ndarray, b: np.ndarray, group: Sequence[int], count: int, c: int, p: float
) -> np.ndarray:
    return (count / (c * p)) * _block(a, b, group)


def _accumulate(
    a: np.ndarray, b: np.ndarray, partition: Partition, weights: np.ndarray, counts: np.ndarray, c: int
) -> np.ndarray:
    total = np.zeros((a.shape[0], b.shape[1]))
    for group in np.flatnonzero(counts):
        total += _scaled_block(
            a, b, partition.groups[group], int(counts[group]), c, float(weights[group])
        )
    return total


def sketch(
    a: DenseMatrix, b: DenseMatrix, partition: Partition, dist: SamplingDistribution, config: SketchConfig
) -> SketchResult:
    """Estimates AB from config.c draws of groups of partition.

    :param a: m x n matrix
    :param b: n x rho matrix
    :param partition: Partition of 0..n-1
    :param dist: Distribution supported on partition
    :param config: Draw count and seed
    :return: The sketch result
    """
    if a.cols != b.rows:
        raise create_dimension_error("sketch", a.shape, b.shape)
    ensure_valid(partition)
    if partition.n != a.cols:
        raise create_dimension_error("sketch", a.shape, (partition.n,))
    if dist.support != partition:
        raise DistributionError("The distribution is not supported on the given partition")
    draws = sample_indices(dist, config.c, config.seed)
    counts = np.bincount(draws, minlength=partition.k)
    estimate = _accumulate(a.values, b.values, partition, dist.weights, counts, config.c)
    logger.debug(
        "Sketch of %dx%d @ %dx%d with k=%d c=%d seed=%d drew %d distinct groups",
        a.rows, a.cols, b.rows, b.cols, partition.k, config.c, config.seed,
        int(np.count_nonzero(counts)),
    )
    return SketchResult(DenseMatrix(estimate), draws, counts, config.seed, partition, dist)


def sketch_finest(a: DenseMatrix, b: DenseMatrix, config: SketchConfig) -> SketchResult:
    """Column-row sampling with the optimal probabilities on singletons"""
    partition = finest(a.cols)
    return sketch(a, b, partition, optimal_distribution(a, b, partition), config)


def sketch_pairwise(a: DenseMatrix, b: DenseMatrix, strategy: PairingStrategy, config: SketchConfig) -> SketchResult:
    """Pairs the inner indices with strategy and samples pairs with the aggregated
    finest probabilities.

    :raises DistributionError: When every element weight is zero
    """
    if a.cols != b.rows:
        raise create_dimension_error("sketch_pairwise", a.shape, b.shape)
    p_finest = optimal_distribution(a, b, finest(a.cols))
    pairs = pair_partition(p_finest, strategy)
    return sketch(a, b, pairs, aggregate_distribution(p_finest, pairs), config)


def element_contribution(
    a: DenseMatrix,
    b: DenseMatrix,
    partition: Partition,
    dist: SamplingDistribution,
    draws: Sequence[int],
    group: int,
) -> DenseMatrix:
    """Returns (times group was drawn) / (c p_l) A[:, G_l] B[G_l, :].

    Adding the contributions of groups 0..k-1 in order reproduces the sketch
    estimate for the same draws exactly.
    """
    if a.cols != b.rows:
        raise create_dimension_error("element_contribution", a.shape, b.shape)
    if not 0 <= group < partition.k:
        raise PartitionError(f"Group {group} is outside of 0..{partition.k - 1}")
    if dist.support != partition:
        raise DistributionError("The distribution is not supported on the given partition")
    c = len(draws)
    if c < 1:
        raise ConfigError("At least one draw is needed")
    count = int(np.count_nonzero(np.asarray(draws) == group))
    if count == 0:
        return DenseMatrix.zeros(a.rows, b.cols)
    return DenseMatrix(
        _scaled_block(a.values, b.values, partition.groups[group], count, c, dist.probability(group))
    )


def draw_log(result: SketchResult) -> Dict[str, Any]:
    """JSON form of the draws, group numbers and indices are 1-based"""
    return {
        "c": result.c,
        "counts": [int(n) for n in result.counts],
        "draws": [int(d) + 1 for d in result.draws],
        "partition": partition_to_json(result.partition),
        "seed": int(result.seed),
    }
