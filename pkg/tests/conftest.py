import pytest

from attenuation.densities import make_density


@pytest.fixture(scope="session")
def D():
    """Density factory keyed by spec string."""
    cache = {}

    def get(spec: str):
        if spec not in cache:
            cache[spec] = make_density(spec)
        return cache[spec]

    return get
