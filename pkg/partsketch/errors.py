from typing import Sequence, Tuple

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DistributionError",
    "EnumerationError",
    "MatrixError",
    "PartitionError",
    "create_dimension_error",
]


class MatrixError(ValueError):
    """Matrix construction or shape related exception."""


class PartitionError(ValueError):
    """Exception used to indicate that a partition violates its invariants"""


class DistributionError(ValueError):
    """Sampling distribution related exception."""


class EnumerationError(ValueError):
    """Raised when an exact enumeration would be too large to carry out"""


class ConfigError(ValueError):
    """Experiment or command line configuration exception."""


class ConvergenceError(ArithmeticError):
    """Exception used to indicate that an iterative method did not converge"""


def create_dimension_error(
    operation: str, left: Tuple[int, ...], right: Sequence[int]
) -> MatrixError:
    left_m = "x".join(str(d) for d in left)
    right_m = "x".join(str(d) for d in right)
    return MatrixError(f"Dimension mismatch ({operation}): {left_m} and {right_m}")
