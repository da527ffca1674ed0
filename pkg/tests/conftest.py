import pytest

from zgkn.model import NormalizedParams
from zgkn.spectrum import solve_ground_pair
from zgkn.wavefunction import angular_profile, radial_profile


@pytest.fixture(scope="session")
def params_a01():
    return NormalizedParams(a=0.1, gamma=-0.2, kappa=0.5, E_scale=1.0)


@pytest.fixture(scope="session")
def ground_a01(params_a01):
    # Shared across modules: the lowest connector pair at (a=0.1, gamma=-0.2).
    return solve_ground_pair(params_a01)


@pytest.fixture(scope="session")
def profiles_a01(params_a01, ground_a01):
    rad = radial_profile(params_a01, ground_a01.E_star, ground_a01.lambda_star)
    ang = angular_profile(params_a01, ground_a01.E_star, ground_a01.lambda_star)
    return rad, ang
