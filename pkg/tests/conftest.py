import numpy as np
import pytest
from hypothesis import settings

from coneflex import generators as gen
from coneflex.hyperideal import truncate

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def schon():
    return gen.schonhardt(1.0, 1.0)


@pytest.fixture(scope="session")
def hyper_schon():
    return gen.hyperideal_schonhardt(1.0, 1.0, 0.95)


@pytest.fixture(scope="session")
def truncated_schon(hyper_schon):
    return truncate(hyper_schon)


@pytest.fixture(scope="session")
def hyper_flex(hyper_schon):
    return gen.canonical_hyperbolic_flex(hyper_schon)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
