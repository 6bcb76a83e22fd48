import numpy as np
import pytest

from mkzfractal.fractal import Partition, ScalingVector
from mkzfractal.grid import IntervalSpec


@pytest.fixture
def unit_interval():
    return IntervalSpec(0.0, 1.0)


@pytest.fixture
def thirds():
    return Partition([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])


@pytest.fixture
def sevenths():
    return Partition(np.arange(8) / 7.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def make_constants(values, partition):
    return ScalingVector.constants(values, partition.interval)
