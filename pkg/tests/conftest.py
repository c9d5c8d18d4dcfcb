import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def random_simplex(rng, d, n):
    """``n`` points uniform on the simplex with ``d + 1`` types."""
    return rng.dirichlet(np.ones(d + 1), size=n)
