"""Dense complex linear algebra for small matrices.

Hermitian generators, the unitaries they exponentiate to, Frobenius norms
and commutators.  Exponentials of Hermitian matrices go through an
eigendecomposition, so the result is unitary by construction (up to
eigensolver accuracy).  The principal logarithm of a unitary goes through
the complex Schur form, which is diagonal for normal matrices, so the
recovered generator is Hermitian by construction.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

#: Relative Frobenius tolerance for accepting a matrix as Hermitian.
HERMITICITY_TOL = 1e-12
#: Absolute Frobenius tolerance for accepting a matrix as unitary.
UNITARITY_TOL = 1e-10
#: Eigenphases closer than this to +/-pi make the principal log ambiguous.
BRANCH_GUARD = 1e-6

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
#: Pauli vector of shape (3, 2, 2); contract with a real 3-vector to get a
#: traceless Hermitian 2x2 matrix.
PAULI = np.stack([PAULI_X, PAULI_Y, PAULI_Z])


class BranchAmbiguityError(ValueError):
    """A unitary has an eigenphase inside the guard band around +/-pi.

    The principal logarithm is then numerically ambiguous.  Callers should
    shorten the evolved interval or split it into sub-intervals and take
    logarithms of the factors.
    """


def _square_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def frobenius_norm(a) -> float:
    """Frobenius norm sqrt(Tr[A A^dag]) = sqrt(sum_ij |a_ij|^2)."""
    return float(np.linalg.norm(np.asarray(a)))


def commutator(a, b) -> np.ndarray:
    """Commutator [A, B] = AB - BA of two equally sized square matrices."""
    a = _square_matrix(a, "a")
    b = _square_matrix(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def hermitian_part(a) -> np.ndarray:
    """(A + A^dag) / 2."""
    a = np.asarray(a)
    return (a + a.conj().T) / 2


def is_hermitian(a, tol: float = HERMITICITY_TOL) -> bool:
    """Whether ||A - A^dag|| <= tol * max(1, ||A||)."""
    a = np.asarray(a)
    return frobenius_norm(a - a.conj().T) <= tol * max(1.0, frobenius_norm(a))


def is_unitary(u, tol: float = UNITARITY_TOL) -> bool:
    """Whether ||U U^dag - 1|| <= tol."""
    u = np.asarray(u)
    delta = u @ u.conj().T - np.eye(u.shape[0])
    return frobenius_norm(delta) <= tol


def herm_exp(h, s: float = 1.0) -> np.ndarray:
    """exp(-i s H) for a Hermitian matrix H and a real scale s.

    Computed as V exp(-i s w) V^dag from the eigendecomposition H = V w V^dag,
    so the result is unitary up to the accuracy of the eigensolver.
    """
    h = _square_matrix(h, "h")
    if not np.isfinite(s):
        raise ValueError(f"scale must be finite, got {s!r}")
    if not is_hermitian(h):
        raise ValueError("herm_exp requires a Hermitian matrix")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * s * w)) @ v.conj().T


def principal_log_unitary(u, guard: float = BRANCH_GUARD) -> np.ndarray:
    """The Hermitian H with exp(-iH) = U and all eigenvalues of H in (-pi, pi).

    Uses the complex Schur form U = Q T Q^dag; for unitary (hence normal) U
    the triangular factor T is diagonal up to round-off, and
    H = Q diag(-angle(T_jj)) Q^dag is Hermitian by construction.

    Raises :class:`BranchAmbiguityError` when an eigenphase of U lies within
    ``guard`` of +/-pi, where the principal branch is ill-defined.
    """
    u = _square_matrix(u, "u")
    if not is_unitary(u):
        raise ValueError("principal_log_unitary requires a unitary matrix")
    t, q = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(t))
    if np.any(np.abs(phases) > np.pi - guard):
        raise BranchAmbiguityError(
            f"eigenphase within {guard:.1e} of +/-pi: the principal logarithm "
            "is ambiguous; reduce the interval or split the evolution"
        )
    return hermitian_part((q * (-phases)) @ q.conj().T)
