import numpy as np
import pytest

from herzkit.anisotropy import AnisotropyVector
from herzkit.sampled_function import Grid, SampledFunction


@pytest.fixture(scope="session")
def grid1d():
    return Grid.uniform(1, 8.0, 513)


@pytest.fixture(scope="session")
def grid1d_coarse():
    return Grid.uniform(1, 8.0, 129)


@pytest.fixture(scope="session")
def grid2d():
    return Grid.uniform(2, 4.0, 65)


@pytest.fixture(scope="session")
def iso1():
    return AnisotropyVector((1.0,))


@pytest.fixture(scope="session")
def iso2():
    return AnisotropyVector((1.0, 1.0))


@pytest.fixture(scope="session")
def aniso21():
    return AnisotropyVector((2.0, 1.0))


def sampled(grid, fn, label=""):
    return SampledFunction.from_callable(grid, fn, label)


def box_indicator_1d(grid, lo, hi):
    """chi_[lo, hi] sampled with the half-at-jump convention."""
    x = grid.axes()[0]
    eps = 1e-12 * max(1.0, abs(hi), abs(lo))
    vals = np.where((x > lo + eps) & (x < hi - eps), 1.0, 0.0)
    vals = np.where((np.abs(x - lo) <= eps) | (np.abs(x - hi) <= eps), 0.5, vals)
    return SampledFunction(grid, vals)
