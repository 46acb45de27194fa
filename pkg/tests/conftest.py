import numpy as np
import pytest

from flowlab.core import GaussianMixtureTarget


@pytest.fixture(scope="session")
def standard2() -> GaussianMixtureTarget:
    return GaussianMixtureTarget.standard_gaussian(2)


@pytest.fixture(scope="session")
def mixture_d1() -> GaussianMixtureTarget:
    # the target the frozen quadrature values were computed for
    return GaussianMixtureTarget(
        dim=1,
        weights=np.array([0.3, 0.7]),
        means=np.array([[-1.0], [0.5]]),
        sigma=0.5,
    )


@pytest.fixture(scope="session")
def mixture_d2() -> GaussianMixtureTarget:
    return GaussianMixtureTarget(
        dim=2,
        weights=np.array([0.5, 0.5]),
        means=np.array([[1.0, 0.0], [-1.0, 0.0]]),
        sigma=0.5,
    )


@pytest.fixture(scope="session")
def separated_d2() -> GaussianMixtureTarget:
    return GaussianMixtureTarget(
        dim=2,
        weights=np.array([0.5, 0.5]),
        means=np.array([[2.0, 0.0], [-2.0, 0.0]]),
        sigma=0.5,
    )


@pytest.fixture(scope="session")
def target_suite(standard2, mixture_d1, mixture_d2):
    return [standard2, mixture_d1, mixture_d2]
