"""Seeded random streams.

Every stream is a counter based Philox generator keyed by a 64-bit seed, so the
i-th uniform of a stream depends only on (seed, i). Sub-seeds for trials, matrix
generation and pairings are derived from a master seed with SeedSequence spawn keys.
"""
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .matrix import DenseMatrix

__all__ = [
    "ADHOC_STREAM",
    "FIG1_STREAM",
    "FIG2_STREAM",
    "MATRIX_STREAM",
    "MAX_SEED",
    "PAIRING_STREAM",
    "check_seed",
    "derive_seed",
    "draw_uniforms",
    "generation_rng",
    "philox",
    "standard_uniform_matrix",
]

MAX_SEED: int = 2 ** 64 - 1

MATRIX_STREAM: int = 0
FIG1_STREAM: int = 1
FIG2_STREAM: int = 2
PAIRING_STREAM: int = 3
ADHOC_STREAM: int = 4


def check_seed(seed: int) -> int:
    """Returns seed as a python int when it fits in 64 unsigned bits"""
    try:
        value = int(seed)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Seed must be an integer, got {seed!r}") from e
    if value != seed or not 0 <= value <= MAX_SEED:
        raise ConfigError(f"Seed must be an integer in 0..{MAX_SEED}, got {seed!r}")
    return value


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=check_seed(seed)))


def draw_uniforms(seed: int, count: int) -> np.ndarray:
    """The first count uniforms in [0, 1) of the stream keyed by seed.

    Prefix stable: draw_uniforms(s, c)[:j] == draw_uniforms(s, j).
    """
    return philox(seed).random(count)


def derive_seed(master: int, *path: int) -> int:
    """Derive an independent 64-bit seed for the stream named by path.

    :param master: The master seed
    :param path: Stream id followed by any grid and trial indices
    :return: The derived seed
    """
    sequence = np.random.SeedSequence(check_seed(master), spawn_key=tuple(path))
    return int(sequence.generate_state(1, np.uint64)[0])


def generation_rng(master: int, *path: int) -> np.random.Generator:
    return philox(derive_seed(master, MATRIX_STREAM, *path))


def standard_uniform_matrix(rows: int, cols: int, master: int, path: Sequence[int] = ()) -> DenseMatrix:
    """A rows x cols matrix of independent U[0, 1) entries from the matrix stream"""
    if rows < 1 or cols < 1:
        raise ConfigError(f"Matrix dimensions must be positive, got {rows} x {cols}")
    return DenseMatrix(generation_rng(master, *path).random((rows, cols)))
