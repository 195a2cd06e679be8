"""Sampling distributions over the groups of a partition."""
import logging
from math import fsum
from typing import Any, Dict, Optional, Sequence

import attr
import numpy as np

from .errors import DistributionError, create_dimension_error
from .matrix import DenseMatrix, _block, _frobenius_array
from .partition import Partition, ensure_valid, finest, partition_from_json, partition_to_json

__all__ = [
    "SUM_TOLERANCE",
    "SamplingDistribution",
    "aggregate_distribution",
    "distribution_from_json",
    "distribution_statistics",
    "distribution_to_json",
    "element_weight",
    "element_weights",
    "finest_distribution",
    "optimal_distribution",
    "uniform_distribution",
]

logger = logging.getLogger(__name__)

SUM_TOLERANCE: float = 1e-12
JSON_SUM_TOLERANCE: float = 1e-9


def _readonly_weights(values: Any) -> np.ndarray:
    weights = np.array(values, dtype=np.float64, copy=True)
    if weights.ndim != 1:
        raise DistributionError("Probabilities must form a vector")
    weights.setflags(write=False)
    return weights


@attr.dataclass(frozen=True, slots=True, eq=False)
class SamplingDistribution:
    """Probabilities p_1..p_k, one per group of support.

    Every probability is finite and nonnegative and they sum to 1 within 1e-12.
    """

    weights: np.ndarray = attr.ib(converter=_readonly_weights)
    support: Partition

    def __attrs_post_init__(self) -> None:
        if len(self.weights) != self.support.k:
            raise DistributionError(
                f"Expected {self.support.k} probabilities, got {len(self.weights)}"
            )
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise DistributionError("Probabilities must be finite and nonnegative")
        total = fsum(self.weights)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise DistributionError(f"Probabilities sum to {total!r}, not 1")

    @property
    def k(self) -> int:
        return self.support.k

    def probability(self, group: int) -> float:
        return float(self.weights[group])


def _conformal(a: DenseMatrix, b: DenseMatrix, partition: Partition) -> None:
    if a.cols != b.rows:
        raise create_dimension_error("element weights", a.shape, b.shape)
    if partition.n != a.cols:
        raise create_dimension_error("element weights", a.shape, (partition.n,))


def _group_weights(a: np.ndarray, b: np.ndarray, groups: Sequence[Sequence[int]]) -> np.ndarray:
    weights = np.empty(len(groups))
    singles = [pos for pos, g in enumerate(groups) if len(g) == 1]
    if singles:
        index = [groups[pos][0] for pos in singles]
        weights[singles] = np.linalg.norm(a[:, index], axis=0) * np.linalg.norm(b[index, :], axis=1)
    for pos, group in enumerate(groups):
        if len(group) > 1:
            weights[pos] = _frobenius_array(_block(a, b, group))
    return weights


def element_weight(a: DenseMatrix, b: DenseMatrix, group: Sequence[int]) -> float:
    """Returns ||A[:, group] B[group, :]||_F.

    Singletons use the column and row norm product, which is the same value.
    """
    if a.cols != b.rows:
        raise create_dimension_error("element weight", a.shape, b.shape)
    if not group or not all(0 <= i < a.cols for i in group):
        raise DistributionError(f"Invalid index group {list(group)!r} for n={a.cols}")
    return float(_group_weights(a.values, b.values, [tuple(group)])[0])


def element_weights(a: DenseMatrix, b: DenseMatrix, partition: Partition) -> np.ndarray:
    """Element weights of every group of partition, in group order"""
    _conformal(a, b, partition)
    ensure_valid(partition)
    return _group_weights(a.values, b.values, partition.groups)


def optimal_distribution(a: DenseMatrix, b: DenseMatrix, partition: Partition) -> SamplingDistribution:
    """p_l proportional to the element weight of group l.

    This choice minimizes the expected squared Frobenius error over all
    distributions on partition.

    :raises DistributionError: When every element weight is zero
    """
    weights = element_weights(a, b, partition)
    total = fsum(weights)
    if total == 0.0:
        raise DistributionError("All element weights are zero, nothing to sample")
    return SamplingDistribution(weights / total, partition)


def finest_distribution(a: DenseMatrix, b: DenseMatrix) -> SamplingDistribution:
    return optimal_distribution(a, b, finest(a.cols))


def aggregate_distribution(p_finest: SamplingDistribution, partition: Partition) -> SamplingDistribution:
    """Sums finest probabilities over the members of each group.

    :param p_finest: Distribution on the finest partition of 0..n-1
    :param partition: Any partition of the same index set
    :return: The aggregated distribution on partition
    """
    support = p_finest.support
    if not support.is_finest or support.n != partition.n:
        raise DistributionError("Aggregation needs a finest distribution over the same index set")
    ensure_valid(partition)
    per_index = np.empty(support.n)
    for position, (index,) in enumerate(support.groups):
        per_index[index] = p_finest.weights[position]
    sums = np.array([fsum(per_index[list(group)]) for group in partition.groups])
    total = fsum(sums)
    if total != 1.0:
        sums = sums / total
    return SamplingDistribution(sums, partition)


def uniform_distribution(partition: Partition) -> SamplingDistribution:
    ensure_valid(partition)
    return SamplingDistribution(np.full(partition.k, 1.0 / partition.k), partition)


def distribution_statistics(dist: SamplingDistribution) -> Dict[str, float]:
    """Returns the max, mean and min probability, the mean is exactly 1/k"""
    return {
        "max": float(np.max(dist.weights)),
        "mean": 1.0 / dist.k,
        "min": float(np.min(dist.weights)),
    }


def distribution_to_json(dist: SamplingDistribution) -> Dict[str, Any]:
    return {
        "partition": partition_to_json(dist.support),
        "weights": [float(p) for p in dist.weights],
    }


def distribution_from_json(obj: Any, n: Optional[int] = None) -> SamplingDistribution:
    """Parses {"partition": [[...]], "weights": [...]}.

    Weights summing to 1 within 1e-9 are renormalized, anything further off is rejected.
    """
    if not isinstance(obj, dict) or "partition" not in obj or "weights" not in obj:
        raise DistributionError("A distribution needs 'partition' and 'weights' entries")
    partition = partition_from_json(obj["partition"], n)
    try:
        weights = np.asarray(obj["weights"], dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise DistributionError(f"Probabilities must be numbers: {e}") from e
    total = fsum(weights) if weights.ndim == 1 else float("nan")
    if not abs(total - 1.0) <= JSON_SUM_TOLERANCE:
        raise DistributionError(f"Probabilities sum to {total!r}, not 1")
    return SamplingDistribution(weights / total, partition)
