from pathlib import Path

import numpy as np
import pytest
from _pytest.fixtures import SubRequest

from partsketch.experiment import ExperimentConfig
from .helpers import Instance, random_instance, small_instance


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240517)


@pytest.fixture
def small() -> Instance:
    return small_instance()


@pytest.fixture(scope="class")
def gram_instance(request: SubRequest) -> Instance:
    """A 6 x 12 Gaussian A with B = A^T, shared by a test class"""
    instance = random_instance(np.random.default_rng(7), 6, 12, gram=True)
    if request.cls:
        request.cls.instance = instance
    yield instance


@pytest.fixture
def tiny_config(tmp_path: Path) -> ExperimentConfig:
    """A 5 x 8 experiment with a handful of trials, fast enough for every run"""
    return ExperimentConfig(
        rows=5,
        cols=8,
        seed=11,
        c_min=4,
        c_max=12,
        c_step=4,
        trials=6,
        runs=5,
        out_dir=tmp_path / "out",
        workers=2,
    )
