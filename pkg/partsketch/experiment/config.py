from pathlib import Path
from typing import Any, Optional, Tuple

import attr

from ..errors import ConfigError
from ..partition import Pairing, PairingStrategy
from ..streams import PAIRING_STREAM, check_seed, derive_seed

__all__ = ["FINEST", "STRATEGY_CHOICES", "ExperimentConfig"]

FINEST = "finest"
STRATEGY_CHOICES: Tuple[str, ...] = tuple(p.value for p in Pairing) + (FINEST,)


def _at_least_one(instance: Any, attribute: "attr.Attribute[int]", value: int) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{attribute.name} must be a positive integer, got {value!r}")


def _seed(instance: Any, attribute: "attr.Attribute[int]", value: int) -> None:
    check_seed(value)


def _strategy(instance: Any, attribute: "attr.Attribute[str]", value: str) -> None:
    if value not in STRATEGY_CHOICES:
        raise ConfigError(f"strategy must be one of {', '.join(STRATEGY_CHOICES)}, got {value!r}")


def _fig2_sizes(instance: Any, attribute: "attr.Attribute[Optional[Tuple[int, ...]]]", value: Optional[Tuple[int, ...]]) -> None:
    if value is not None and (not value or any(c < 1 for c in value)):
        raise ConfigError(f"fig2 draw counts must be positive, got {value!r}")


def _optional_sizes(value: Any) -> Optional[Tuple[int, ...]]:
    return None if value is None else tuple(int(c) for c in value)


@attr.dataclass(frozen=True, slots=True)
class ExperimentConfig:
    """Settings of the Monte Carlo reproductions.

    The defaults are the desk scale, see :meth:`paper_scale` for the full runs.
    Draws of trial t at grid point g derive their seed from (seed, g, t) so
    every method sees the same seeds.
    """

    rows: int = attr.ib(default=50, validator=_at_least_one)
    cols: int = attr.ib(default=500, validator=_at_least_one)
    seed: int = attr.ib(default=0, validator=_seed)
    c_min: int = attr.ib(default=250, validator=_at_least_one)
    c_max: int = attr.ib(default=1500, validator=_at_least_one)
    c_step: int = attr.ib(default=250, validator=_at_least_one)
    trials: int = attr.ib(default=200, validator=_at_least_one)
    runs: int = attr.ib(default=5000, validator=_at_least_one)
    strategy: str = attr.ib(default="enhanced", validator=_strategy)
    out_dir: Path = attr.ib(default=Path("results"), converter=Path)
    matrix_path: Optional[Path] = attr.ib(
        default=None, converter=attr.converters.optional(Path)
    )
    fig2_c: Optional[Tuple[int, ...]] = attr.ib(
        default=None, converter=_optional_sizes, validator=_fig2_sizes
    )
    workers: int = attr.ib(default=4, validator=_at_least_one)

    def __attrs_post_init__(self) -> None:
        if self.c_max < self.c_min:
            raise ConfigError(f"c_max ({self.c_max}) is smaller than c_min ({self.c_min})")

    @classmethod
    def desk(cls, **overrides: Any) -> "ExperimentConfig":
        return cls(**overrides)

    @classmethod
    def paper_scale(cls, **overrides: Any) -> "ExperimentConfig":
        """100 x 2000 matrix, c from 1000 to 3000, 1000 trials and 50000 runs"""
        settings = dict(
            rows=100, cols=2000, c_min=1000, c_max=3000, c_step=250, trials=1000, runs=50000
        )
        settings.update(overrides)
        return cls(**settings)

    @property
    def c_grid(self) -> Tuple[int, ...]:
        return tuple(range(self.c_min, self.c_max + 1, self.c_step))

    @property
    def fig2_sizes(self) -> Tuple[int, ...]:
        """Draw counts of the spectral error histograms for the generated operand"""
        return self.fig2_sizes_for(self.cols)

    def fig2_sizes_for(self, n: int) -> Tuple[int, ...]:
        """Draw counts of the spectral error histograms for an operand with n columns

        :param n: Inner dimension of the operand actually sketched
        :return: fig2_c when set, otherwise n / 2 and 3n / 2
        """
        if self.fig2_c is not None:
            return self.fig2_c
        return max(1, n // 2), max(1, 3 * n // 2)

    def pairing(self) -> Optional[PairingStrategy]:
        """The configured pairing, None for the finest partition"""
        if self.strategy == FINEST:
            return None
        seed = derive_seed(self.seed, PAIRING_STREAM) if self.strategy == Pairing.RANDOM.value else None
        return PairingStrategy.parse(self.strategy, seed)
