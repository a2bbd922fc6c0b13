import pytest

from cbie.geometry import lens_domain
from cbie.manufactured import canonical_solutions


@pytest.fixture(scope="session")
def lens():
    return lens_domain()


@pytest.fixture(scope="session")
def solutions():
    return canonical_solutions()
