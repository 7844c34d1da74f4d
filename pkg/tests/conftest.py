import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def finite_diff(fn, x, h=1e-6):
    """Central-difference gradient of a scalar function, test oracle."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g


def finite_diff_matrix(grad_fn, x, h=1e-5):
    """Central differences of a vector field, returns the Jacobian."""
    x = np.asarray(x, dtype=float)
    d = x.size
    jac = np.zeros((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        jac[:, j] = (grad_fn(x + e) - grad_fn(x - e)) / (2 * h)
    return jac
