import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from spinmeas import Triad, triad_from_angles


def random_hermitian(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (m + m.conj().T) / 2


def random_unitary(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(m)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_unit_vector(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_rotation(rng):
    return Rotation.from_rotvec(rng.normal(size=3)).as_matrix()


def rotated_triad(rng, psi, theta, phi):
    """Triad with the given tilt angles, in a random orientation."""
    base = triad_from_angles(psi, theta, phi)
    rot = random_rotation(rng)
    return Triad(rot @ base.e1, rot @ base.e2, rot @ base.e3)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
