"""Simulation and analysis of quantum dynamics driven by random sudden quenches.

A driving protocol chops a fixed time interval into N equal steps and draws
an independent random Hermitian generator for each step from a
time-indexed matrix ensemble.  The package samples the resulting evolution
operators, estimates how their fluctuations shrink as N grows, and fits the
power-law decay of the self-averaging diagnostics S_N (operator variance)
and D_N (distance between the averaged evolution and the evolution of the
averaged generator).
"""

from .analysis import (
    PowerLawFit,
    ScalingSeries,
    default_fit_range,
    power_law_fit,
    r_n_factor,
    run_scaling,
    write_series_csv,
)
from .bch import (
    BchTruncation,
    ConvergenceCheck,
    bch_order2,
    bch_p1,
    bch_truncation,
    check_convergence_domain,
    log_oracle,
)
from .ensembles import (
    EnsembleSpec,
    MeanProfile,
    RngStream,
    is_statistically_commuting,
    mean_hamiltonian,
    mean_vector,
    pauli_hamiltonian,
    sample_hamiltonian,
)
from .estimators import (
    DeviationCheck,
    EstimateWithError,
    MomentAccumulator,
    ParityReport,
    collect_moments,
    d_n,
    deviation_from_reference,
    parity_test_even_pdf,
    s_n,
)
from .linalg import (
    PAULI,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    BranchAmbiguityError,
    commutator,
    frobenius_norm,
    herm_exp,
    hermitian_part,
    is_hermitian,
    is_unitary,
    principal_log_unitary,
)
from .protocol import (
    ProtocolConfig,
    QuenchRealization,
    effective_hamiltonian,
    evolve,
    evolve_deterministic,
    mean_generated_evolution,
    sample_realization,
)

__version__ = "0.1.0"

__all__ = [
    "BchTruncation",
    "BranchAmbiguityError",
    "ConvergenceCheck",
    "DeviationCheck",
    "EnsembleSpec",
    "EstimateWithError",
    "MeanProfile",
    "MomentAccumulator",
    "PAULI",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "ParityReport",
    "PowerLawFit",
    "ProtocolConfig",
    "QuenchRealization",
    "RngStream",
    "ScalingSeries",
    "bch_order2",
    "bch_p1",
    "bch_truncation",
    "check_convergence_domain",
    "collect_moments",
    "commutator",
    "d_n",
    "default_fit_range",
    "deviation_from_reference",
    "effective_hamiltonian",
    "evolve",
    "evolve_deterministic",
    "frobenius_norm",
    "herm_exp",
    "hermitian_part",
    "is_hermitian",
    "is_statistically_commuting",
    "is_unitary",
    "log_oracle",
    "mean_generated_evolution",
    "mean_hamiltonian",
    "mean_vector",
    "parity_test_even_pdf",
    "pauli_hamiltonian",
    "power_law_fit",
    "principal_log_unitary",
    "r_n_factor",
    "run_scaling",
    "s_n",
    "sample_hamiltonian",
    "sample_realization",
    "write_series_csv",
]
