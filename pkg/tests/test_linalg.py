import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinmeas.linalg import (
    TOL,
    NotHermitianError,
    SingularMatrixError,
    dagger,
    exp_i,
    hermitian_eig,
    is_psd,
    is_unitary,
    operator_norm,
    polar_unitary,
    tensor,
)

from conftest import random_hermitian, random_unitary


def power_iteration_norm(m, iterations=2000):
    """Independent estimate of the largest |eigenvalue| of a Hermitian matrix:
    power iteration on M @ M (eigenvalues are the squares)."""
    rng = np.random.default_rng(99)
    m2 = m @ m
    v = rng.normal(size=m.shape[0]) + 1j * rng.normal(size=m.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(iterations):
        v = m2 @ v
        v /= np.linalg.norm(v)
    return float(np.sqrt(np.real(v.conj() @ m2 @ v)))


class TestHermitianEig:
    def test_identity(self):
        w, _ = hermitian_eig(np.eye(3))
        np.testing.assert_allclose(w, [1, 1, 1])

    def test_diagonal_ascending(self):
        w, _ = hermitian_eig(np.diag([1.0, -1.0, 0.0]))
        np.testing.assert_allclose(w, [-1, 0, 1])

    def test_random_residuals(self, rng):
        m = random_hermitian(rng, 6)
        w, v = hermitian_eig(m)
        for k in range(6):
            assert np.linalg.norm(m @ v[:, k] - w[k] * v[:, k]) <= 1e-9
        assert np.abs(dagger(v) @ v - np.eye(6)).max() <= 1e-10

    def test_reconstruction(self, rng):
        for _ in range(10):
            m = random_hermitian(rng, 5)
            w, v = hermitian_eig(m)
            rebuilt = (v * w) @ dagger(v)
            assert np.abs(rebuilt - m).max() <= 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestOperatorNorm:
    def test_zero(self):
        assert operator_norm(np.zeros((4, 4))) == 0.0

    def test_diagonal(self):
        assert operator_norm(np.diag([-3.0, 2.0])) == pytest.approx(3.0)

    def test_power_iteration_oracle(self, rng):
        for _ in range(5):
            m = random_hermitian(rng, 7)
            assert operator_norm(m) == pytest.approx(power_iteration_norm(m), abs=1e-8)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            operator_norm(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_triangle_inequality(self, rng):
        for _ in range(50):
            a = random_hermitian(rng, 4)
            b = random_hermitian(rng, 4)
            assert operator_norm(a + b) <= operator_norm(a) + operator_norm(b) + 1e-12


class TestExpI:
    def test_zero_generator(self):
        np.testing.assert_allclose(exp_i(np.zeros((3, 3))), np.eye(3), atol=1e-15)

    def test_scalar_phase(self):
        np.testing.assert_allclose(
            exp_i(np.pi * np.diag([1.0, 0.0])), np.diag([-1.0 + 0j, 1.0]), atol=1e-14
        )

    def test_projector_generator_closed_form(self, rng):
        # exp(i (pi/2) P (x) s) = (1-P)(x)1 + i P(x)s for a projector P and
        # a Hermitian involution s.
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        p = np.outer(v, v.conj())
        s = np.array([[0.0, 1j], [-1j, 0.0]])
        lhs = exp_i((np.pi / 2) * tensor(p, s))
        rhs = tensor(np.eye(4) - p, np.eye(2)) + 1j * tensor(p, s)
        assert np.abs(lhs - rhs).max() <= 1e-10

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_inverse_property(self, seed):
        h = random_hermitian(np.random.default_rng(seed), 4)
        u = exp_i(h) @ exp_i(-h)
        assert np.abs(u - np.eye(4)).max() <= 1e-10

    def test_result_unitary(self, rng):
        for _ in range(10):
            assert is_unitary(exp_i(random_hermitian(rng, 5)), 1e-10)


class TestTensor:
    def test_identities(self):
        np.testing.assert_allclose(tensor(np.eye(2), np.eye(3)), np.eye(6))

    def test_diagonal(self):
        np.testing.assert_allclose(
            tensor(np.diag([2.0, 5.0]), np.eye(2)), np.diag([2.0, 2.0, 5.0, 5.0])
        )

    def test_mixed_product(self, rng):
        a = random_hermitian(rng, 3)
        b = random_hermitian(rng, 4)
        u = rng.normal(size=3) + 1j * rng.normal(size=3)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        lhs = tensor(a, b) @ np.kron(u, v)
        rhs = np.kron(a @ u, b @ v)
        assert np.abs(lhs - rhs).max() <= 1e-12

    def test_associative(self, rng):
        a, b, c = (random_hermitian(rng, k) for k in (2, 3, 2))
        assert np.abs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c))).max() <= 1e-12


class TestPolarUnitary:
    def test_unitary_fixed_point(self, rng):
        u = random_unitary(rng, 4)
        assert np.abs(polar_unitary(u) - u).max() <= 1e-10

    def test_positive_diagonal(self):
        np.testing.assert_allclose(polar_unitary(np.diag([2.0, 3.0])), np.eye(2), atol=1e-12)

    def test_recovers_unitary_factor(self, rng):
        for _ in range(10):
            u = random_unitary(rng, 5)
            p = random_hermitian(rng, 5)
            p = p @ p + 0.5 * np.eye(5)  # positive definite
            m = u @ p
            assert np.abs(polar_unitary(m) - u).max() <= 1e-9

    def test_rejects_singular(self):
        with pytest.raises(SingularMatrixError):
            polar_unitary(np.diag([1.0, 0.0]))


def test_psd_predicate(rng):
    m = random_hermitian(rng, 4)
    assert is_psd(m @ m, TOL.psd)
    assert not is_psd(-np.eye(3), TOL.psd)
