"""Shared construction helpers for the test suite."""

import numpy as np

from quench_sim import ProtocolConfig, QuenchRealization, hermitian_part


def random_hermitian(gen: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    a = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    return scale * hermitian_part(a)


def random_unitary(gen: np.random.Generator, dim: int) -> np.ndarray:
    a = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_realization(
    gen: np.random.Generator,
    n_steps: int,
    dim: int = 2,
    step_norm: float = 0.1,
    tau: float = 1.0,
) -> QuenchRealization:
    """A realization whose steps all have Frobenius norm step_norm / tau."""
    config = ProtocolConfig(None, tau, n_steps)
    hams = []
    for _ in range(n_steps):
        h = random_hermitian(gen, dim)
        hams.append(h * (step_norm / (np.linalg.norm(h) * tau)))
    return QuenchRealization(np.stack(hams), config)
