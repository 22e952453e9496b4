import numpy as np
import pytest

from mcpool import kernels

FIXTURES = __import__("pathlib").Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT-compile once so individual tests measure steady-state behaviour.
    kernels.warmup()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def random_forecasts(rng, m, n, k, floor=0.0):
    """Random valid forecast rows; floor>0 keeps them strictly positive."""
    raw = rng.random((m, n, k)) + floor
    return raw / raw.sum(axis=2, keepdims=True)
