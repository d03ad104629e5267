import numpy as np
import pytest

from qwlab import (
    NonlinearitySpec,
    ProblemSpec,
    make_basis,
    zero_field,
)


@pytest.fixture(scope="session")
def basis8():
    return make_basis(1, 8, 4)


@pytest.fixture(scope="session")
def basis2d():
    return make_basis(2, 4, 4)


@pytest.fixture(scope="session")
def quintic():
    return NonlinearitySpec((0.0, 0.0, 0.0, 0.0, 0.0, 1.0))


@pytest.fixture(scope="session")
def cubic():
    return NonlinearitySpec((0.0, 0.0, 0.0, 1.0))


@pytest.fixture(scope="session")
def zero_f():
    return NonlinearitySpec((0.0,))


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def free_problem(basis, gamma=1.0):
    return ProblemSpec(
        basis=basis,
        gamma=gamma,
        forcing=zero_field(basis),
        nonlinearity=NonlinearitySpec((0.0,)),
        galerkin_n=basis.n_modes,
    )


def quintic_problem(basis, gamma=1.0, forcing=None, galerkin_n=None):
    return ProblemSpec(
        basis=basis,
        gamma=gamma,
        forcing=forcing if forcing is not None else zero_field(basis),
        nonlinearity=NonlinearitySpec((0.0, 0.0, 0.0, 0.0, 0.0, 1.0)),
        galerkin_n=galerkin_n if galerkin_n is not None else basis.n_modes,
    )
