import numpy as np
import pytest

from nlhomog import (
    Grid,
    GridFunction,
    assemble_eps,
    make_constant,
    make_cosine_difference,
    make_pareto_kernel,
)


@pytest.fixture(scope="session")
def pareto1():
    return make_pareto_kernel(dimension=1, alpha=1.0)


@pytest.fixture(scope="session")
def cos_coeff():
    return make_cosine_difference()


@pytest.fixture(scope="session")
def grid64():
    return Grid(dimension=1, half_width=8.0, n=64)


@pytest.fixture(scope="session")
def grid256():
    return Grid(dimension=1, half_width=8.0, n=256)


@pytest.fixture(scope="session")
def op_small(pareto1, cos_coeff, grid256):
    """eps-operator reused by identity and solver tests."""
    return assemble_eps(pareto1, cos_coeff, 0.25, grid256)


@pytest.fixture(scope="session")
def op_const(pareto1, grid256):
    return assemble_eps(pareto1, make_constant(1.0), 0.25, grid256)


@pytest.fixture
def gaussian_f(grid256):
    return GridFunction.from_callable(
        grid256, lambda x: np.exp(-0.5 * (x / 0.5) ** 2)
    )
