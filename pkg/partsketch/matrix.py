"""Dense real matrices and the exact operations the sketches are measured against.

Matrices are immutable row-major float64 arrays. Index groups are 0-based
sequences of column indices of A (equivalently row indices of B).
"""
import io
from math import sqrt
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Tuple, Union

import attr
import numpy as np

from .errors import ConvergenceError, MatrixError, create_dimension_error

__all__ = [
    "DEFAULT_MAX_ITERS",
    "DEFAULT_TOL",
    "DenseMatrix",
    "block_product",
    "column_row_norms",
    "frobenius_norm",
    "load_matrix",
    "matrix_from_bytes",
    "matrix_from_csv",
    "matrix_to_bytes",
    "matrix_to_csv",
    "multiply",
    "save_matrix",
    "spectral_norm",
]

DEFAULT_TOL: float = 1e-10
DEFAULT_MAX_ITERS: int = 10000

BINARY_SUFFIXES = frozenset({".bin"})
HEADER_DTYPE = np.dtype("<u8")
PAYLOAD_DTYPE = np.dtype("<f8")

PathLike = Union[str, Path]


def _readonly_matrix(values: Any) -> np.ndarray:
    try:
        array = np.array(values, dtype=np.float64, order="C", copy=True)
    except (TypeError, ValueError) as e:
        raise MatrixError(f"Matrix entries must be real numbers: {e}") from e
    if array.ndim != 2:
        raise MatrixError(f"A matrix needs exactly two dimensions, got {array.ndim}")
    if array.shape[0] < 1 or array.shape[1] < 1:
        raise MatrixError(f"A matrix needs at least one row and one column, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise MatrixError("Matrix entries must be finite (no NaN or Inf)")
    array.setflags(write=False)
    return array


@attr.dataclass(frozen=True, slots=True, eq=False, repr=False)
class DenseMatrix:
    """Immutable dense real matrix stored row-major in double precision."""

    values: np.ndarray = attr.ib(converter=_readonly_matrix)

    @classmethod
    def from_values(cls, rows: int, cols: int, values: Iterable[float]) -> "DenseMatrix":
        """Build a matrix from a flat row-major list of entries.

        :param rows: Number of rows
        :param cols: Number of columns
        :param values: rows * cols entries in row-major order
        :return: The new matrix
        """
        flat = np.asarray(list(values), dtype=np.float64)
        if rows < 1 or cols < 1 or flat.size != rows * cols:
            raise MatrixError(
                f"Expected {rows} x {cols} = {rows * cols} values, got {flat.size}"
            )
        return cls(flat.reshape(rows, cols))

    @classmethod
    def identity(cls, n: int) -> "DenseMatrix":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "DenseMatrix":
        return cls(np.zeros((rows, cols)))

    @classmethod
    def diagonal(cls, entries: Sequence[float]) -> "DenseMatrix":
        return cls(np.diag(np.asarray(entries, dtype=np.float64)))

    @property
    def rows(self) -> int:
        """Returns the number of rows"""
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        """Returns the number of columns"""
        return self.values.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def T(self) -> "DenseMatrix":
        """Returns the transpose as a new matrix"""
        return DenseMatrix(self.values.T)

    def tolist(self) -> list:
        return self.values.tolist()

    def __array__(self, dtype: Any = None, copy: Any = None) -> np.ndarray:
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __str__(self) -> str:
        return f"{self.__class__.__name__}(rows={self.rows}, cols={self.cols})"

    def __repr__(self) -> str:
        return self.__str__()


def _frobenius_array(values: np.ndarray) -> float:
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if scale == 0.0:
        return 0.0
    scaled = values / scale
    return scale * sqrt(float(np.sum(scaled * scaled)))


def _contiguous_range(group: Sequence[int]) -> Optional[Tuple[int, int]]:
    start, stop = min(group), max(group) + 1
    if stop - start == len(group) and len(set(group)) == len(group):
        return start, stop
    return None


def _block(a: np.ndarray, b: np.ndarray, group: Sequence[int]) -> np.ndarray:
    """A[:, group] @ B[group, :] without validation.

    Groups covering a contiguous index range, in any order, are taken as slices
    so the full-index group performs exactly the same product as a plain a @ b.
    """
    span = _contiguous_range(group)
    if span is not None:
        start, stop = span
        return a[:, start:stop] @ b[start:stop, :]
    index = list(group)
    return a[:, index] @ b[index, :]


def _check_conformal(operation: str, a: DenseMatrix, b: DenseMatrix) -> None:
    if a.cols != b.rows:
        raise create_dimension_error(operation, a.shape, b.shape)


def _check_group(group: Sequence[int], n: int) -> None:
    if len(group) == 0:
        raise MatrixError("Index group must not be empty")
    for index in group:
        if not 0 <= index < n:
            raise MatrixError(f"Index {index} is outside of 0..{n - 1}")


def multiply(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Returns the exact product AB.

    :param a: m x n matrix
    :param b: n x rho matrix
    :return: The m x rho product
    :raises MatrixError: When A.cols != B.rows
    """
    _check_conformal("multiply", a, b)
    return DenseMatrix(a.values @ b.values)


def frobenius_norm(a: DenseMatrix) -> float:
    """Returns sqrt(sum of squared entries), zero iff A is the zero matrix."""
    return _frobenius_array(a.values)


def _power_iterate(gram: np.ndarray, vector: np.ndarray, tol: float, max_iters: int) -> float:
    image = gram @ vector
    rayleigh = float(vector @ image)
    for _ in range(max_iters):
        vector = image / np.linalg.norm(image)
        image = gram @ vector
        updated = float(vector @ image)
        if abs(updated - rayleigh) <= tol * updated:
            return updated
        rayleigh = updated
    raise ConvergenceError(
        f"Power iteration did not converge within {max_iters} iterations (tol={tol})"
    )


def spectral_norm(
    a: DenseMatrix, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS
) -> float:
    """Largest singular value of A by power iteration on the smaller Gram matrix.

    The iteration starts from the normalized all-ones vector. The largest Gram
    eigenvalue is at least the largest Gram diagonal entry, so when the all-ones
    vector is annihilated or settles below that entry the iteration restarts from
    the unit vector of the largest diagonal entry. Convergence is declared once the
    Rayleigh quotient changes by at most tol relative to its value.

    :param a: The matrix
    :param tol: Relative tolerance, must be positive
    :param max_iters: Maximum number of power steps
    :return: ||A||_2
    :raises ConvergenceError: When the tolerance is not met within max_iters steps
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be positive, got {max_iters}")
    values = a.values
    gram = values.T @ values if values.shape[1] <= values.shape[0] else values @ values.T
    if not np.any(gram):
        return 0.0
    dim = gram.shape[0]
    diagonal = np.diag(gram)
    start = np.full(dim, 1.0 / sqrt(dim))
    largest = 0.0
    if np.any(gram @ start):
        largest = _power_iterate(gram, start, tol, max_iters)
    if largest < float(diagonal.max()) * (1.0 - tol):
        start = np.zeros(dim)
        start[int(np.argmax(diagonal))] = 1.0
        largest = max(largest, _power_iterate(gram, start, tol, max_iters))
    return sqrt(largest)


def block_product(a: DenseMatrix, b: DenseMatrix, group: Sequence[int]) -> DenseMatrix:
    """Returns A[:, group] B[group, :].

    Summing the block products over the groups of any partition gives AB.

    :param a: m x n matrix
    :param b: n x rho matrix
    :param group: Nonempty 0-based indices into 0..n-1
    :return: The m x rho block product
    """
    _check_conformal("block_product", a, b)
    _check_group(group, a.cols)
    return DenseMatrix(_block(a.values, b.values, group))


def column_row_norms(a: DenseMatrix, b: DenseMatrix) -> np.ndarray:
    """Returns the products ||A[:, l]||_2 ||B[l, :]||_2 for every index l."""
    _check_conformal("column_row_norms", a, b)
    norms = np.linalg.norm(a.values, axis=0) * np.linalg.norm(b.values, axis=1)
    norms.setflags(write=False)
    return norms


def matrix_to_csv(a: DenseMatrix) -> str:
    """One row per line, comma separated, 17 significant digits (round-trip exact)"""
    buffer = io.StringIO()
    np.savetxt(buffer, a.values, delimiter=",", fmt="%.17g")
    return buffer.getvalue()


def matrix_from_csv(text: str) -> DenseMatrix:
    try:
        values = np.loadtxt(io.StringIO(text), delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as e:
        raise MatrixError(f"Malformed matrix CSV: {e}") from e
    return DenseMatrix(values)


def matrix_to_bytes(a: DenseMatrix) -> bytes:
    """Binary layout: rows, cols as uint64 little-endian, then row-major float64 LE."""
    header = np.array(a.shape, dtype=HEADER_DTYPE).tobytes()
    return header + a.values.astype(PAYLOAD_DTYPE).tobytes(order="C")


def matrix_from_bytes(data: bytes) -> DenseMatrix:
    header_size = 2 * HEADER_DTYPE.itemsize
    if len(data) < header_size:
        raise MatrixError("Binary matrix is shorter than its header")
    rows, cols = (int(d) for d in np.frombuffer(data[:header_size], dtype=HEADER_DTYPE))
    expected = header_size + rows * cols * PAYLOAD_DTYPE.itemsize
    if len(data) != expected:
        raise MatrixError(
            f"Binary matrix of {rows} x {cols} needs {expected} bytes, got {len(data)}"
        )
    payload = np.frombuffer(data[header_size:], dtype=PAYLOAD_DTYPE)
    return DenseMatrix(payload.reshape(rows, cols))


def load_matrix(path: PathLike) -> DenseMatrix:
    """Reads a matrix from a .bin file (binary layout) or any other file as CSV."""
    path = Path(path)
    if path.suffix.lower() in BINARY_SUFFIXES:
        return matrix_from_bytes(path.read_bytes())
    return matrix_from_csv(path.read_text(encoding="utf-8"))


def save_matrix(path: PathLike, a: DenseMatrix) -> None:
    path = Path(path)
    if path.suffix.lower() in BINARY_SUFFIXES:
        path.write_bytes(matrix_to_bytes(a))
    else:
        path.write_text(matrix_to_csv(a), encoding="utf-8")
