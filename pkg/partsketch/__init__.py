from .analysis import (
    BoundReport,
    PairingComparators,
    ThresholdResult,
    ThresholdRule,
    bernstein_tail_bound,
    binomial_cdf,
    bound_report,
    brute_force_expectation,
    expected_frobenius_error_sq,
    min_draw_threshold,
    optimal_expected_error,
    pairing_comparators,
    uniform_spectral_bound,
)
from .distributions import (
    SamplingDistribution,
    aggregate_distribution,
    distribution_statistics,
    element_weight,
    optimal_distribution,
    uniform_distribution,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DistributionError,
    EnumerationError,
    MatrixError,
    PartitionError,
)
from .matrix import DenseMatrix, block_product, frobenius_norm, multiply, spectral_norm
from .partition import PairingStrategy, Partition, coarsen, finest, pair_partition, validate
from .sketch import SketchConfig, SketchResult, element_contribution, sketch, sketch_pairwise

__version__ = "0.1.0"

__all__ = [
    "aggregate_distribution",
    "bernstein_tail_bound",
    "binomial_cdf",
    "block_product",
    "bound_report",
    "BoundReport",
    "brute_force_expectation",
    "coarsen",
    "ConfigError",
    "ConvergenceError",
    "DenseMatrix",
    "distribution_statistics",
    "DistributionError",
    "element_contribution",
    "element_weight",
    "EnumerationError",
    "expected_frobenius_error_sq",
    "finest",
    "frobenius_norm",
    "MatrixError",
    "min_draw_threshold",
    "multiply",
    "optimal_distribution",
    "optimal_expected_error",
    "pair_partition",
    "pairing_comparators",
    "PairingComparators",
    "PairingStrategy",
    "Partition",
    "PartitionError",
    "SamplingDistribution",
    "sketch",
    "sketch_pairwise",
    "SketchConfig",
    "SketchResult",
    "spectral_norm",
    "ThresholdResult",
    "ThresholdRule",
    "uniform_distribution",
    "uniform_spectral_bound",
    "validate",
]
