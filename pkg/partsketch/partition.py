"""Partitions of the inner index set and pairing strategies.

Indices are 0-based in the python API and 1-based in the JSON form.
"""
import logging
import operator
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Iterator, List, Optional, Tuple, Union

import attr
import numpy as np

from .codec import loads
from .errors import ConfigError, PartitionError
from .streams import check_seed, philox

if TYPE_CHECKING:  # pragma: no cover
    from .distributions import SamplingDistribution

__all__ = [
    "Group",
    "Pairing",
    "PairingStrategy",
    "Partition",
    "coarsen",
    "ensure_valid",
    "finest",
    "load_partition",
    "pair_partition",
    "pairing_order",
    "partition_from_json",
    "partition_to_json",
    "validate",
]

logger = logging.getLogger(__name__)

Group = Tuple[int, ...]


def _freeze_groups(groups: Iterable[Iterable[Any]]) -> Tuple[Group, ...]:
    try:
        return tuple(tuple(operator.index(i) for i in group) for group in groups)
    except TypeError as e:
        raise PartitionError(f"Partition groups must hold integer indices: {e}") from e


@attr.dataclass(frozen=True, slots=True)
class Partition:
    """Ordered groups of indices out of 0..n-1.

    Construction does not check the partition invariants, use
    :func:`validate` or :func:`ensure_valid` for that.
    """

    n: int
    groups: Tuple[Group, ...] = attr.ib(converter=_freeze_groups)

    @property
    def k(self) -> int:
        """Returns the number of groups"""
        return len(self.groups)

    @property
    def is_finest(self) -> bool:
        return self.k == self.n and all(len(g) == 1 for g in self.groups)

    def group_of(self) -> np.ndarray:
        """Returns the group position of every index"""
        owner = np.full(self.n, -1, dtype=np.int64)
        for position, group in enumerate(self.groups):
            owner[list(group)] = position
        return owner

    def __len__(self) -> int:
        return self.k

    def __iter__(self) -> Iterator[Group]:
        return iter(self.groups)


def validate(partition: Partition) -> Optional[str]:
    """Checks the partition invariants.

    :param partition: The partition to check
    :return: None when the partition is valid otherwise a message naming the
      violated invariant (empty group, out of range, overlap or coverage)
    """
    n = partition.n
    if n < 1:
        return f"size: the index set must be nonempty, got n={n}"
    k = partition.k
    if not 1 <= k <= n:
        return f"group count: expected 1 <= k <= {n}, got k={k}"
    seen = set()
    for position, group in enumerate(partition.groups, start=1):
        if not group:
            return f"empty group: group {position} has no indices"
        for index in group:
            if not 0 <= index < n:
                return f"out of range: index {index + 1} of group {position} is outside 1..{n}"
            if index in seen:
                return f"overlap: index {index + 1} appears more than once"
            seen.add(index)
    if len(seen) != n:
        missing = next(i for i in range(n) if i not in seen)
        return f"coverage: index {missing + 1} is not in any group"
    return None


def ensure_valid(partition: Partition) -> Partition:
    msg = validate(partition)
    if msg is not None:
        raise PartitionError(msg)
    return partition


def finest(n: int) -> Partition:
    """The partition into n singletons {0}, {1}, ..., {n-1}"""
    if n < 1:
        raise PartitionError(f"The index set must be nonempty, got n={n}")
    return Partition(n, tuple((i,) for i in range(n)))


def coarsen(groups: Iterable[Iterable[int]], n: int) -> Partition:
    """Builds and validates a user supplied partition.

    :param groups: Lists of 0-based indices
    :param n: Size of the index set
    :return: The validated partition
    :raises PartitionError: When the groups do not partition 0..n-1
    """
    return ensure_valid(Partition(n, groups))


class Pairing(str, Enum):
    ENHANCED = "enhanced"
    RANDOM = "random"
    BALANCED = "balanced"
    SIMPLE = "simple"


def _pairing_seed(
    instance: "PairingStrategy", attribute: "attr.Attribute[Optional[int]]", value: Optional[int]
) -> None:
    if instance.kind is Pairing.RANDOM:
        if value is None:
            raise ConfigError("The random pairing needs a seed")
        check_seed(value)
    elif value is not None:
        raise ConfigError(f"The {instance.kind.value} pairing does not take a seed")


@attr.dataclass(frozen=True, slots=True)
class PairingStrategy:
    """How the ordering I of 0..n-1 is chosen before consecutive entries are paired.

    ENHANCED sorts by ascending finest probability, RANDOM takes a seeded
    permutation, BALANCED alternates largest and smallest remaining and SIMPLE
    keeps the identity order. Ties are broken by ascending index.
    """

    kind: Pairing = attr.ib(converter=Pairing)
    seed: Optional[int] = attr.ib(default=None, validator=_pairing_seed)

    @classmethod
    def enhanced(cls) -> "PairingStrategy":
        return cls(Pairing.ENHANCED)

    @classmethod
    def random(cls, seed: int) -> "PairingStrategy":
        return cls(Pairing.RANDOM, seed)

    @classmethod
    def balanced(cls) -> "PairingStrategy":
        return cls(Pairing.BALANCED)

    @classmethod
    def simple(cls) -> "PairingStrategy":
        return cls(Pairing.SIMPLE)

    @classmethod
    def parse(cls, name: str, seed: Optional[int] = None) -> "PairingStrategy":
        """Parses a strategy name, the seed is only used by the random pairing"""
        try:
            kind = Pairing(name.lower())
        except ValueError:
            names = ", ".join(p.value for p in Pairing)
            raise ConfigError(f"Unknown pairing strategy {name!r}, expected one of {names}")
        return cls(kind, seed if kind is Pairing.RANDOM else None)

    @property
    def label(self) -> str:
        return f"{self.kind.value}-pairwise"

    def __str__(self) -> str:
        if self.seed is None:
            return self.kind.value
        return f"{self.kind.value}(seed={self.seed})"


def pairing_order(weights: np.ndarray, strategy: PairingStrategy) -> np.ndarray:
    """Returns the ordering I whose consecutive entries become the pairs.

    :param weights: Finest probabilities p_1..p_n
    :param strategy: The pairing strategy
    :return: A permutation of 0..n-1
    """
    n = len(weights)
    kind = strategy.kind
    if kind is Pairing.SIMPLE:
        return np.arange(n)
    if kind is Pairing.RANDOM:
        return philox(strategy.seed).permutation(n)
    ascending = np.argsort(weights, kind="stable")
    if kind is Pairing.ENHANCED:
        return ascending
    order: List[int] = []
    lo, hi = 0, n - 1
    while lo < hi:
        order.append(int(ascending[hi]))
        order.append(int(ascending[lo]))
        lo += 1
        hi -= 1
    if lo == hi:
        order.append(int(ascending[lo]))
    return np.asarray(order, dtype=np.int64)


def pair_partition(p_finest: "SamplingDistribution", strategy: PairingStrategy) -> Partition:
    """Pairs consecutive entries of the strategy ordering.

    With odd n the last entry of the ordering forms a singleton group.

    :param p_finest: Distribution on the finest partition
    :param strategy: The pairing strategy
    :return: The pairwise partition with ceil(n / 2) groups
    """
    support = p_finest.support
    if not support.is_finest:
        raise PartitionError("Pairings are built from a distribution on the finest partition")
    n = support.n
    if n < 2:
        raise PartitionError(f"Pairing needs at least two indices, got n={n}")
    if n % 2:
        logger.debug("Odd index count %d, the last index of the ordering stays single", n)
    weights = np.empty(n)
    for position, (index,) in enumerate(support.groups):
        weights[index] = p_finest.weights[position]
    order = [int(i) for i in pairing_order(weights, strategy)]
    return Partition(n, tuple(tuple(order[i:i + 2]) for i in range(0, n, 2)))


def partition_to_json(partition: Partition) -> List[List[int]]:
    """JSON form: array of arrays of 1-based indices"""
    return [[index + 1 for index in group] for group in partition.groups]


def partition_from_json(obj: Any, n: Optional[int] = None) -> Partition:
    """Parses the JSON form and validates it.

    :param obj: Decoded JSON, an array of arrays of 1-based indices
    :param n: Size of the index set, defaults to the largest listed index
    :return: The validated partition
    """
    if not isinstance(obj, list) or not all(isinstance(g, list) for g in obj):
        raise PartitionError("A partition must be an array of arrays of indices")
    for group in obj:
        for index in group:
            if isinstance(index, bool) or not isinstance(index, int):
                raise PartitionError(f"Partition indices must be integers, got {index!r}")
    if n is None:
        n = max((max(g) for g in obj if g), default=0)
    return coarsen(([index - 1 for index in group] for group in obj), n)


def load_partition(path: Union[str, Path], n: Optional[int] = None) -> Partition:
    with open(path, "r", encoding="utf-8") as fp:
        text = fp.read()
    try:
        obj = loads(text)
    except ValueError as e:
        raise PartitionError(f"Malformed partition file {path}: {e}") from e
    return partition_from_json(obj, n)
