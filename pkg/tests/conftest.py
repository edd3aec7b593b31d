import numpy as np
import pytest

from gatefid import adjoint


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_matrix(rng, n, scale=1.0):
    """Random complex matrix with entries uniform in the scaled unit square."""
    return scale * (rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n)))


def random_unit_disc_matrix(rng, n):
    """Entries uniform in the complex unit disc."""
    out = np.empty((n, n), dtype=np.complex128)
    count = 0
    while count < n * n:
        z = rng.uniform(-1, 1, (2 * n * n, 2))
        vals = z[:, 0] + 1j * z[:, 1]
        vals = vals[np.abs(vals) <= 1.0]
        take = min(len(vals), n * n - count)
        out.flat[count : count + take] = vals[:take]
        count += take
    return out


def random_unitary(rng, n):
    """Haar unitary via QR of a complex Ginibre matrix."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_hermitian(rng, n):
    m = random_matrix(rng, n)
    return (m + adjoint(m)) / 2


def random_antihermitian(rng, n):
    m = random_matrix(rng, n)
    return (m - adjoint(m)) / 2
