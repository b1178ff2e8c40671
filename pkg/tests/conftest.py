import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=50, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal(n)
    return g / np.linalg.norm(g)


def unit_vectors(n: int):
    """Hypothesis strategy for unit vectors in dimension n."""
    return st.integers(0, 2**32 - 1).map(lambda s: random_unit(np.random.default_rng(s), n))


def mc_within(emp: float, truth: float, se: float, k: float = 4.0) -> bool:
    return abs(emp - truth) <= k * se


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
