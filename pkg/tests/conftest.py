import numpy as np
import pytest

from ris_street import ExpoEnvParams, StreetGeometry
from ris_street.backend import available_backends


@pytest.fixture(scope="session")
def backends():
    return available_backends()


@pytest.fixture(params=sorted(available_backends()))
def kernels(request):
    return available_backends()[request.param]


@pytest.fixture
def reference_env():
    return ExpoEnvParams(gamma1=0.5, gamma2=0.5)


@pytest.fixture
def reference_geo():
    return StreetGeometry.from_rho(20.0, l=10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
