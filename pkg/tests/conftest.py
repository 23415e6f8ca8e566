import numpy as np
import pytest

from nhqfi import _kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    _kernels.warmup()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def dense_pt(n, t, g):
    """Independent dense builder for oracle checks (site j = 1..n)."""
    H = np.zeros((n, n), complex)
    for j in range(n - 1):
        H[j, j + 1] = t
        H[j + 1, j] = t
    for j in range(n):
        H[j, j] = 1j * g * (-1.0) ** (j + 1)
    return H


def dense_nhse(n, t, gamma):
    H = np.zeros((n, n), complex)
    for j in range(n - 1):
        H[j, j + 1] = t + gamma
        H[j + 1, j] = t - gamma
    return H
