import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def pytest_configure(config):
    config.addinivalue_line("markers", "property: randomized property suites")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_frame(gen, dim, r):
    q, _ = np.linalg.qr(gen.standard_normal((dim, r)))
    return q
