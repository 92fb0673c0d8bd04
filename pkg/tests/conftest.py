import pytest

from cone_sobolev import builtin_cone


@pytest.fixture(scope="session")
def halfplane():
    return builtin_cone("halfplane-x1")


@pytest.fixture(scope="session")
def quadrant():
    return builtin_cone("quadrant-x1x2")


@pytest.fixture(scope="session")
def disc():
    return builtin_cone("disc-unweighted")
