"""Error expectations, tail bounds and draw thresholds for partition sketches."""
import itertools
import logging
from enum import Enum
from math import exp, fsum, log, prod
from typing import Any, Dict, NamedTuple, Optional, Tuple

import attr
import numpy as np
from scipy.special import gammaln, logsumexp, xlog1py, xlogy

from .distributions import SamplingDistribution, element_weights
from .errors import DistributionError, EnumerationError, create_dimension_error
from .matrix import DenseMatrix, _block, column_row_norms, frobenius_norm, multiply, spectral_norm
from .partition import Partition, ensure_valid

__all__ = [
    "ENUMERATION_LIMIT",
    "BoundReport",
    "BruteForceExpectation",
    "PairingComparators",
    "ThresholdResult",
    "ThresholdRule",
    "bernstein_bound",
    "bernstein_tail_bound",
    "binomial_cdf",
    "bound_report",
    "brute_force_expectation",
    "comparator_tail_bounds",
    "expected_frobenius_error_sq",
    "min_draw_threshold",
    "optimal_expected_error",
    "pairing_comparators",
    "relative_errors",
    "uniform_spectral_bound",
]

logger = logging.getLogger(__name__)

ENUMERATION_LIMIT: int = 10 ** 6
THRESHOLD_FACTOR: float = 100.0
_THRESHOLD_SLACK: float = 1e-12


def _nonnegative(instance: Any, attribute: "attr.Attribute[float]", value: float) -> None:
    if not (np.isfinite(value) and value >= 0):
        raise ValueError(f"{attribute.name} must be finite and nonnegative, got {value!r}")


@attr.dataclass(frozen=True, slots=True)
class BoundReport:
    """Quantities entering the Bernstein tail bound for a (partition, distribution) pair.

    weight_sum is M, the sum of element weights. u1 is the largest weight to
    probability ratio and u2 the sum of squared weights over probabilities.
    """

    weight_sum: float = attr.ib(validator=_nonnegative)
    u1: float = attr.ib(validator=_nonnegative)
    u2: float = attr.ib(validator=_nonnegative)
    ab_spectral: float = attr.ib(validator=_nonnegative)
    ab_frobenius: float = attr.ib(validator=_nonnegative)
    m_rows: int
    rho_cols: int

    def to_json(self) -> Dict[str, Any]:
        return {
            "M": self.weight_sum,
            "U1": self.u1,
            "U2": self.u2,
            "ab_frobenius": self.ab_frobenius,
            "ab_spectral": self.ab_spectral,
            "m_rows": self.m_rows,
            "rho_cols": self.rho_cols,
        }


class ThresholdRule(str, Enum):
    """Right hand side used when searching the draw threshold s_c.

    PER_GROUP compares against 100 (c / k) (1 - F), the draw count of one fixed group.
    UNION compares against 100 c (1 - F), a union bound over every group and is
    the more conservative of the two.
    """

    UNION = "union"
    PER_GROUP = "per-group"


@attr.dataclass(frozen=True, slots=True)
class ThresholdResult:
    s_c: Optional[int]
    feasible: bool
    c: int
    k: int
    rule: ThresholdRule

    def to_json(self) -> Dict[str, Any]:
        return {"c": self.c, "feasible": self.feasible, "k": self.k, "rule": self.rule.value, "s_c": self.s_c}


class PairingComparators(NamedTuple):
    """Bound ingredients under a column norm proxy.

    m1 and u1 describe the finest partition, m2 and u2 the given pairing.
    """

    m1: float
    m2: float
    u1: float
    u2: float


class BruteForceExpectation(NamedTuple):
    mean_estimate: DenseMatrix
    expected_error_sq: float


def _check_operands(
    operation: str, a: DenseMatrix, b: DenseMatrix, partition: Partition, dist: SamplingDistribution
) -> None:
    if a.cols != b.rows:
        raise create_dimension_error(operation, a.shape, b.shape)
    if partition.n != a.cols:
        raise create_dimension_error(operation, a.shape, (partition.n,))
    if dist.support != partition:
        raise DistributionError("The distribution is not supported on the given partition")


def _weight_ratios(weights: np.ndarray, probs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if np.any((probs == 0) & (weights > 0)):
        raise DistributionError("A group with positive weight has probability zero")
    positive = probs > 0
    return weights[positive], probs[positive]


def expected_frobenius_error_sq(
    a: DenseMatrix, b: DenseMatrix, partition: Partition, dist: SamplingDistribution, c: int
) -> float:
    """E||AB - S||_F^2 = (sum_l w_l^2 / p_l - ||AB||_F^2) / c.

    :raises DistributionError: When a group of positive weight has probability zero
    """
    if c < 1:
        raise ValueError(f"c must be positive, got {c}")
    _check_operands("expected error", a, b, partition, dist)
    weights, probs = _weight_ratios(element_weights(a, b, partition), dist.weights)
    product_sq = frobenius_norm(multiply(a, b)) ** 2
    value = (fsum(weights * weights / probs) - product_sq) / c
    return max(value, 0.0)


def optimal_expected_error(a: DenseMatrix, b: DenseMatrix, partition: Partition, c: int) -> float:
    """((sum_l w_l)^2 - ||AB||_F^2) / c, the expected error under the optimal distribution"""
    if c < 1:
        raise ValueError(f"c must be positive, got {c}")
    total = fsum(element_weights(a, b, partition))
    if total == 0.0:
        return 0.0
    return max((total * total - frobenius_norm(multiply(a, b)) ** 2) / c, 0.0)


def bound_report(
    a: DenseMatrix, b: DenseMatrix, partition: Partition, dist: SamplingDistribution
) -> BoundReport:
    _check_operands("bound report", a, b, partition, dist)
    all_weights = element_weights(a, b, partition)
    weights, probs = _weight_ratios(all_weights, dist.weights)
    ratios = weights / probs
    product = multiply(a, b)
    return BoundReport(
        weight_sum=fsum(all_weights),
        u1=float(np.max(ratios)) if len(ratios) else 0.0,
        u2=fsum(weights * ratios),
        ab_spectral=spectral_norm(product),
        ab_frobenius=frobenius_norm(product),
        m_rows=a.rows,
        rho_cols=b.cols,
    )


def bernstein_bound(
    m_rows: int, rho_cols: int, c: int, epsilon: float, variance: float, almost_sure: float
) -> float:
    """(m + rho) exp(-c eps^2 / (2 variance + eps almost_sure))

    :param variance: The variance proxy sigma^2
    :param almost_sure: The almost sure bound L
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if c < 1:
        raise ValueError(f"c must be positive, got {c}")
    denominator = 2.0 * variance + epsilon * almost_sure
    if denominator == 0.0:
        return 0.0
    return (m_rows + rho_cols) * exp(-c * epsilon * epsilon / denominator)


def bernstein_tail_bound(report: BoundReport, c: int, epsilon: float) -> float:
    """Upper bound on P(||AB - S||_2 >= epsilon) for c draws.

    sigma^2 = ||AB||_2^2 + 2 M ||AB||_2 + U2 and L = ||AB||_2 + U1.
    """
    ab = report.ab_spectral
    variance = ab * ab + 2.0 * report.weight_sum * ab + report.u2
    return bernstein_bound(report.m_rows, report.rho_cols, c, epsilon, variance, ab + report.u1)


def _log_binomial_pmf(j: np.ndarray, trials: int, xi: float) -> np.ndarray:
    return (
        gammaln(trials + 1)
        - gammaln(j + 1)
        - gammaln(trials - j + 1)
        + xlogy(j, xi)
        + xlog1py(trials - j, -xi)
    )


def binomial_cdf(s: int, trials: int, xi: float) -> float:
    """P(Y <= s) for Y ~ Binomial(trials, xi), summed in log space.

    Returns 0 for s < 0 and 1 for s >= trials.
    """
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi}")
    if trials < 0:
        raise ValueError(f"trials must be nonnegative, got {trials}")
    if s < 0:
        return 0.0
    if s >= trials:
        return 1.0
    log_terms = _log_binomial_pmf(np.arange(s + 1), trials, xi)
    return min(1.0, float(np.exp(logsumexp(log_terms))))


def min_draw_threshold(c: int, k: int, rule: ThresholdRule = ThresholdRule.PER_GROUP) -> ThresholdResult:
    """Smallest s in 2..c with s >= 100 scale (1 - F(s - 2; c - 1, 1/k)).

    scale is c for the UNION rule and c / k for PER_GROUP. The search only runs when
    (c - 1) log k >= log 100, otherwise the result is marked infeasible. A feasible
    input always has a solution since s = c meets the bound, so comparisons carry a
    relative slack of one part in 10^12 for inputs sitting exactly on the boundary.
    """
    if c < 2:
        raise ValueError(f"c must be at least 2, got {c}")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    rule = ThresholdRule(rule)
    if (c - 1) * log(k) < log(THRESHOLD_FACTOR) * (1.0 - _THRESHOLD_SLACK):
        return ThresholdResult(None, False, c, k, rule)
    trials = c - 1
    log_pmf = _log_binomial_pmf(np.arange(trials + 1), trials, 1.0 / k)
    # log_upper[t] = log P(Y >= t)
    log_upper = np.logaddexp.accumulate(log_pmf[::-1])[::-1]
    scale = THRESHOLD_FACTOR * (c if rule is ThresholdRule.UNION else c / k)
    for s in range(2, c):
        bound = scale * min(1.0, float(np.exp(log_upper[s - 1])))
        if s >= bound * (1.0 - _THRESHOLD_SLACK):
            return ThresholdResult(s, True, c, k, rule)
    return ThresholdResult(c, True, c, k, rule)


def uniform_spectral_bound(a: DenseMatrix, b: DenseMatrix, c: int, k: int, s_c: int) -> float:
    """k (s_c - 1) / c ||A||_2 ||B||_2, the uniform sampling spectral error bound"""
    if a.cols != b.rows:
        raise create_dimension_error("uniform bound", a.shape, b.shape)
    return k * (s_c - 1) / c * spectral_norm(a) * spectral_norm(b)


def pairing_comparators(a: DenseMatrix, b: DenseMatrix, pairing: Partition) -> PairingComparators:
    """Comparators of the finest partition and pairing with w_l = ||A_l|| ||B_l||.

    W is the sum of all w_l and s_j the sum over pair j:
    M1 = 2 (W - min w), M2 = 2 (W - min s), u1 = 4 / W sum w (W - w)^2 and
    u2 = 4 / W sum s (W - s)^2.
    """
    ensure_valid(pairing)
    if pairing.n != a.cols:
        raise create_dimension_error("pairing comparators", a.shape, (pairing.n,))
    w = column_row_norms(a, b)
    total = fsum(w)
    if total == 0.0:
        return PairingComparators(0.0, 0.0, 0.0, 0.0)
    sums = np.array([fsum(w[list(group)]) for group in pairing.groups])
    return PairingComparators(
        m1=2.0 * (total - float(np.min(w))),
        m2=2.0 * (total - float(np.min(sums))),
        u1=4.0 / total * fsum(w * (total - w) ** 2),
        u2=4.0 / total * fsum(sums * (total - sums) ** 2),
    )


def comparator_tail_bounds(
    comparators: PairingComparators, m_rows: int, rho_cols: int, c: int, epsilon: float
) -> Tuple[float, float]:
    """Tail bounds built from (m1, u1) and (m2, u2), finest first then paired"""
    finest_bound = bernstein_bound(m_rows, rho_cols, c, epsilon, comparators.u1, comparators.m1)
    paired_bound = bernstein_bound(m_rows, rho_cols, c, epsilon, comparators.u2, comparators.m2)
    return finest_bound, paired_bound


def brute_force_expectation(
    a: DenseMatrix,
    b: DenseMatrix,
    partition: Partition,
    dist: SamplingDistribution,
    c: int,
    limit: int = ENUMERATION_LIMIT,
) -> BruteForceExpectation:
    """Exact E[S] and E||AB - S||_F^2 by enumerating every draw sequence.

    :raises EnumerationError: When k^c exceeds limit
    """
    _check_operands("brute force", a, b, partition, dist)
    if c < 1:
        raise ValueError(f"c must be positive, got {c}")
    if partition.k ** c > limit:
        raise EnumerationError(f"{partition.k}^{c} draw sequences exceed the limit of {limit}")
    probs = dist.weights
    support = [int(g) for g in np.flatnonzero(probs)]
    terms = np.stack(
        [_block(a.values, b.values, partition.groups[g]) / (c * probs[g]) for g in support]
    )
    product = multiply(a, b).values
    mean = np.zeros_like(product)
    errors = []
    for sequence in itertools.product(range(len(support)), repeat=c):
        weight = prod(float(probs[support[i]]) for i in sequence)
        estimate = terms[list(sequence)].sum(axis=0)
        mean += weight * estimate
        diff = product - estimate
        errors.append(weight * float(np.sum(diff * diff)))
    return BruteForceExpectation(DenseMatrix(mean), fsum(errors))


def relative_errors(product: DenseMatrix, estimate: DenseMatrix) -> Tuple[float, float]:
    """Returns ||AB - S||_F / ||AB||_F and ||AB - S||_2 / ||AB||_2"""
    diff = DenseMatrix(product.values - estimate.values)
    return (
        frobenius_norm(diff) / frobenius_norm(product),
        spectral_norm(diff) / spectral_norm(product),
    )
