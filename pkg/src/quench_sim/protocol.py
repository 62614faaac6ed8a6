"""Step-like driving protocols and the unitaries they generate.

A protocol splits the interval [0, tau) into N equal steps of length
dt = tau / N starting at t_k = (k - 1) tau / N.  A realization assigns one
Hermitian generator to each step; its evolution operator is the ordered
product of the step exponentials with the k = 1 factor applied first
(rightmost):

    U = exp(-i H_N dt) ... exp(-i H_2 dt) exp(-i H_1 dt)

The effective Hamiltonian of a realization is the Hermitian generator that
reproduces the whole product in a single exponential over [0, tau); it is
extracted with the principal matrix logarithm and therefore depends on tau.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .ensembles import EnsembleSpec, RngStream, mean_hamiltonian, sample_hamiltonian
from .linalg import herm_exp, principal_log_unitary


@dataclass(frozen=True)
class ProtocolConfig:
    """Driving interval, step count and the ensemble the steps draw from.

    ``spec`` may be None for purely deterministic evolutions that never
    sample.
    """

    spec: Optional[EnsembleSpec]
    total_time: float
    n_quenches: int

    def __post_init__(self):
        if not (np.isfinite(self.total_time) and self.total_time > 0):
            raise ValueError(f"total_time must be a positive finite real, got {self.total_time!r}")
        if not isinstance(self.n_quenches, (int, np.integer)) or self.n_quenches < 1:
            raise ValueError(f"n_quenches must be a positive integer, got {self.n_quenches!r}")

    @property
    def dt(self) -> float:
        return self.total_time / self.n_quenches

    def quench_times(self) -> np.ndarray:
        """Step start times t_k = (k - 1) tau / N for k = 1..N."""
        return np.arange(self.n_quenches) * (self.total_time / self.n_quenches)


@dataclass(frozen=True)
class QuenchRealization:
    """Ordered generators (H_1, ..., H_N), one per protocol step."""

    hamiltonians: np.ndarray  # complex array of shape (N, M, M)
    config: ProtocolConfig

    def __post_init__(self):
        h = np.asarray(self.hamiltonians, dtype=complex)
        if h.ndim != 3 or h.shape[1] != h.shape[2]:
            raise ValueError(f"hamiltonians must have shape (N, M, M), got {h.shape}")
        if h.shape[0] != self.config.n_quenches:
            raise ValueError(
                f"realization length {h.shape[0]} does not match n_quenches {self.config.n_quenches}"
            )
        object.__setattr__(self, "hamiltonians", h)

    @property
    def dim(self) -> int:
        return self.hamiltonians.shape[1]

    def reverse(self) -> "QuenchRealization":
        """The same steps in reverse order (H_N, ..., H_1)."""
        return QuenchRealization(self.hamiltonians[::-1].copy(), self.config)


def sample_realization(config: ProtocolConfig, rng) -> QuenchRealization:
    """Draw the N step generators, H_k from the ensemble at t_k.

    ``rng`` is an :class:`RngStream` (one stream per Monte Carlo sample) or
    an already-built generator; the k-th step consumes the stream's k-th
    block of draws.
    """
    if config.spec is None:
        raise ValueError("config has no ensemble spec to sample from")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    times = config.quench_times()
    hams = np.stack([sample_hamiltonian(config.spec, t, gen) for t in times])
    return QuenchRealization(hams, config)


def evolve(realization: QuenchRealization) -> np.ndarray:
    """Ordered product of step exponentials, k = 1 applied first."""
    dt = realization.config.dt
    u = np.eye(realization.dim, dtype=complex)
    for h in realization.hamiltonians:
        u = herm_exp(h, dt) @ u
    return u


def effective_hamiltonian(realization: QuenchRealization) -> np.ndarray:
    """The Hermitian H with exp(-i tau H) = evolve(realization).

    Uses the principal logarithm, so all eigenvalues of tau * H lie in
    (-pi, pi); a :class:`BranchAmbiguityError` propagates when the product
    leaves the principal branch (split the interval in that case).
    """
    tau = realization.config.total_time
    return principal_log_unitary(evolve(realization)) / tau


def mean_generated_evolution(config: ProtocolConfig, n_ref: Optional[int] = None) -> np.ndarray:
    """Evolution generated by the time-dependent ensemble mean.

    With ``n_ref`` None, the generator is the step-like mean (constant on
    each of the config's N steps), so the ordered product of the N step
    exponentials is exact.  Passing ``n_ref`` evaluates the continuous-limit
    reference instead: the time-ordered exponential of t -> <H(t)> as an
    ordered product over n_ref fine steps (choose n_ref >> N).
    """
    if config.spec is None:
        raise ValueError("config has no ensemble spec")
    n = config.n_quenches if n_ref is None else int(n_ref)
    if n < 1:
        raise ValueError(f"n_ref must be a positive integer, got {n_ref!r}")
    dt = config.total_time / n
    u = np.eye(config.spec.dim, dtype=complex)
    for k in range(n):
        u = herm_exp(mean_hamiltonian(config.spec, k * dt), dt) @ u
    return u


def evolve_deterministic(h_of_t: Callable[[float], np.ndarray], config: ProtocolConfig) -> np.ndarray:
    """Step-like evolution of a deterministic driving t -> H(t).

    Builds H_k = h_of_t(t_k) on the config's step grid and evolves; as the
    step count grows this converges to the continuous time-ordered
    evolution.
    """
    hams = np.stack([np.asarray(h_of_t(t), dtype=complex) for t in config.quench_times()])
    return evolve(QuenchRealization(hams, config))
