"""Truncated product-log expansion of the effective Hamiltonian.

For a realization (H_1, ..., H_N) evolved over [0, tau), the generator of
the full product can be expanded in nested commutators of the step
operators A_k = -i tau H_k.  With the "k = 1 rightmost" product ordering,
the expansion through second order is

    Z = (1/N) sum_k A_k  +  (1/(2 N^2)) sum_{j > k} [A_j, A_k]  +  O(3)

Scaled back to Hamiltonian units (multiplied by i / tau), the first term is
the arithmetic mean of the steps; the second adds -i tau / (2 N^2) times
the ordered commutator sum.  The coefficient assignment of the second-order
term is pinned by tests against the exact matrix-log oracle (the two-factor
case and the cubic-remainder scaling), not assumed.

The exact oracle is :func:`log_oracle`, the principal-log effective
Hamiltonian; the expansion is certified to converge when every step
satisfies ||H_k|| tau < 1 (see :func:`check_convergence_domain`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import frobenius_norm
from .protocol import QuenchRealization, effective_hamiltonian


@dataclass(frozen=True)
class BchTruncation:
    """Truncated expansion: Hermitian contributions per order, in Hamiltonian units."""

    order: int
    terms: tuple  # tuple of ndarrays, terms[n-1] is the order-n contribution

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if len(self.terms) != self.order:
            raise ValueError(f"expected {self.order} terms, got {len(self.terms)}")

    @property
    def hamiltonian(self) -> np.ndarray:
        """Sum of the contributions: the truncated effective Hamiltonian."""
        return sum(self.terms)


@dataclass(frozen=True)
class ConvergenceCheck:
    """Whether every step is inside the certified convergence ball, with margin."""

    converged: bool
    margin: float  # 1 - max_k ||H_k|| tau; nonnegative iff converged


def _order1_term(realization: QuenchRealization) -> np.ndarray:
    return realization.hamiltonians.mean(axis=0)


def _order2_term(realization: QuenchRealization) -> np.ndarray:
    hams = realization.hamiltonians
    n = hams.shape[0]
    tau = realization.config.total_time
    # sum_{j>k} [H_j, H_k] = sum_j [H_j, prefix_{j-1}] with prefix sums, O(N) products
    total = np.zeros_like(hams[0])
    prefix = np.zeros_like(hams[0])
    for j in range(1, n):
        prefix += hams[j - 1]
        total += hams[j] @ prefix - prefix @ hams[j]
    return (-1j * tau / (2 * n * n)) * total


def bch_p1(realization: QuenchRealization) -> np.ndarray:
    """Order-1 truncation: the arithmetic mean of the step generators."""
    return _order1_term(realization)


def bch_order2(realization: QuenchRealization) -> np.ndarray:
    """Order-2 truncation of the effective Hamiltonian.

    Valid inside the convergence ball (see :func:`check_convergence_domain`);
    outside it the value is still computed but carries no convergence
    certificate.
    """
    if realization.config.n_quenches < 2:
        raise ValueError("order-2 truncation needs at least 2 quenches")
    return _order1_term(realization) + _order2_term(realization)


def bch_truncation(realization: QuenchRealization, order: int) -> BchTruncation:
    """The truncation with its per-order contributions kept separate."""
    if order == 1:
        return BchTruncation(1, (_order1_term(realization),))
    if order == 2:
        if realization.config.n_quenches < 2:
            raise ValueError("order-2 truncation needs at least 2 quenches")
        return BchTruncation(2, (_order1_term(realization), _order2_term(realization)))
    raise ValueError(f"order must be 1 or 2, got {order}")


def log_oracle(realization: QuenchRealization) -> np.ndarray:
    """Exact effective Hamiltonian via the principal matrix logarithm.

    Ground truth for every truncation; only defined on the principal branch.
    """
    return effective_hamiltonian(realization)


def check_convergence_domain(realization: QuenchRealization) -> ConvergenceCheck:
    """Certificate that every step satisfies ||H_k|| tau < 1.

    Inside this ball the expansion of the product logarithm converges
    absolutely; the margin is 1 - max_k ||H_k|| tau.
    """
    tau = realization.config.total_time
    worst = max(frobenius_norm(h) for h in realization.hamiltonians)
    margin = 1.0 - worst * tau
    return ConvergenceCheck(converged=margin > 0, margin=margin)
