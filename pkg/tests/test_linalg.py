import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quench_sim import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    BranchAmbiguityError,
    commutator,
    frobenius_norm,
    herm_exp,
    is_hermitian,
    is_unitary,
    principal_log_unitary,
)
from helpers import random_hermitian


class TestFrobeniusNorm:
    def test_identity(self):
        assert frobenius_norm(np.eye(2)) == pytest.approx(np.sqrt(2))

    def test_zero(self):
        assert frobenius_norm(np.zeros((3, 3))) == 0.0

    def test_pauli_x(self):
        # direct entrywise sum: |1|^2 + |1|^2
        expected = np.sqrt(sum(abs(x) ** 2 for x in PAULI_X.ravel()))
        assert frobenius_norm(PAULI_X) == pytest.approx(expected)
        assert expected == pytest.approx(np.sqrt(2))


class TestCommutator:
    def test_pauli_algebra(self):
        np.testing.assert_allclose(commutator(PAULI_X, PAULI_Y), 2j * PAULI_Z, atol=1e-15)

    def test_self_commutator_vanishes(self):
        a = random_hermitian(np.random.default_rng(0), 3)
        np.testing.assert_allclose(commutator(a, a), 0, atol=1e-15)

    def test_diagonal_matrices_commute(self):
        np.testing.assert_allclose(
            commutator(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])), 0, atol=0
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            commutator(np.eye(2), np.eye(3))


class TestHermExp:
    def test_zero_hamiltonian(self):
        for s in (0.0, 1.0, -3.7):
            np.testing.assert_allclose(herm_exp(np.zeros((2, 2)), s), np.eye(2), atol=1e-15)

    def test_diagonal(self):
        u = herm_exp(PAULI_Z, np.pi / 2)
        expected = np.diag([np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)])
        np.testing.assert_allclose(u, expected, atol=1e-15)

    def test_pauli_x_half_turn(self):
        # closed form: exp(-i s X) = cos(s) 1 - i sin(s) X, at s = pi
        u = herm_exp(PAULI_X, np.pi)
        expected = np.cos(np.pi) * np.eye(2) - 1j * np.sin(np.pi) * PAULI_X
        np.testing.assert_allclose(u, expected, atol=1e-15)
        np.testing.assert_allclose(u, -np.eye(2), atol=1e-15)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            herm_exp(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)

    def test_rejects_non_finite_scale(self):
        with pytest.raises(ValueError, match="finite"):
            herm_exp(np.eye(2), np.inf)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 3, 5]))
    @settings(max_examples=60, deadline=None)
    def test_result_is_unitary(self, seed, dim):
        h = random_hermitian(np.random.default_rng(seed), dim)
        u = herm_exp(h, 0.7)
        assert is_unitary(u)
        # unitary norm constancy: ||U||^2 = dim
        assert frobenius_norm(u) ** 2 == pytest.approx(dim, abs=1e-10)

    @given(st.integers(0, 2**32 - 1), st.floats(-2, 2), st.floats(-2, 2))
    @settings(max_examples=60, deadline=None)
    def test_group_property(self, seed, a, b):
        h = random_hermitian(np.random.default_rng(seed), 3)
        combined = herm_exp(h, a) @ herm_exp(h, b)
        np.testing.assert_allclose(combined, herm_exp(h, a + b), atol=1e-10)


class TestPrincipalLog:
    def test_identity(self):
        np.testing.assert_allclose(principal_log_unitary(np.eye(3)), 0, atol=1e-12)

    def test_small_rotation_round_trip(self):
        h = 0.3 * PAULI_Y
        np.testing.assert_allclose(principal_log_unitary(herm_exp(h, 1.0)), h, atol=1e-10)

    def test_diagonal_phases(self):
        u = np.diag([np.exp(-0.5j), np.exp(1.2j)])
        np.testing.assert_allclose(principal_log_unitary(u), np.diag([0.5, -1.2]), atol=1e-12)

    def test_branch_guard(self):
        u = np.diag([np.exp(1j * (np.pi - 1e-8)), 1.0])
        with pytest.raises(BranchAmbiguityError):
            principal_log_unitary(u)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="unitary"):
            principal_log_unitary(2.0 * np.eye(2))

    def test_result_is_hermitian(self):
        gen = np.random.default_rng(5)
        u = herm_exp(random_hermitian(gen, 4, scale=0.3), 1.0)
        assert is_hermitian(principal_log_unitary(u))

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4]), st.floats(0.01, 2.9))
    @settings(max_examples=80, deadline=None)
    def test_round_trip_random(self, seed, dim, norm):
        # ||H|| < 3 < pi - 0.01 keeps every eigenvalue inside the principal branch
        h = random_hermitian(np.random.default_rng(seed), dim)
        h *= norm / frobenius_norm(h)
        np.testing.assert_allclose(principal_log_unitary(herm_exp(h, 1.0)), h, atol=1e-9)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_submultiplicativity(seed):
    gen = np.random.default_rng(seed)
    dim = int(gen.integers(1, 6))
    a = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    b = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    assert frobenius_norm(a @ b) <= frobenius_norm(a) * frobenius_norm(b) * (1 + 1e-12)
