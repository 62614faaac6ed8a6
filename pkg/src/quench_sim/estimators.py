"""Monte Carlo moment estimation for random evolution operators.

Accumulators keep streaming elementwise first and second moments of a
matrix-valued random variable, split into a fixed number of jackknife
batches keyed by sample index, so that error bars -- like the sums
themselves -- do not depend on how samples were scheduled across workers.

``collect_moments`` is the sampling loop: sample j draws from the random
stream (seed, stream_offset + j), work is cut into fixed-size blocks
regardless of worker count, and the per-block partial sums are merged in
block order.  Results are therefore identical for any number of workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import qubit_kernels
from .ensembles import RngStream
from .linalg import frobenius_norm, principal_log_unitary
from .protocol import ProtocolConfig, evolve, sample_realization

DEFAULT_BATCHES = 50
# fixed sample-block size; must not depend on the worker count
_BLOCK = 2048
# variance estimates below this are corruption, not round-off
_VARIANCE_FLOOR = -1e-12


@dataclass(frozen=True)
class EstimateWithError:
    """Nonnegative scalar estimate with a jackknife standard error."""

    value: float
    std_error: float
    n_samples: int

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError(f"std_error must be nonnegative, got {self.std_error}")


class MomentAccumulator:
    """Streaming per-entry moments (sum U, sum |U|^2) of complex matrices.

    Samples land in ``n_batches`` jackknife batches by sample index
    (index mod n_batches).  Merging adds batchwise, so it is associative
    and commutative up to floating-point reassociation.
    """

    def __init__(self, dim: int, n_batches: int = DEFAULT_BATCHES):
        if not isinstance(dim, (int, np.integer)) or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")
        if not isinstance(n_batches, (int, np.integer)) or n_batches < 1:
            raise ValueError(f"n_batches must be a positive integer, got {n_batches!r}")
        self.dim = int(dim)
        self.n_batches = int(n_batches)
        self._counts = np.zeros(self.n_batches, dtype=np.int64)
        self._sums = np.zeros((self.n_batches, dim, dim), dtype=complex)
        self._sq_sums = np.zeros((self.n_batches, dim, dim), dtype=float)

    @property
    def count(self) -> int:
        return int(self._counts.sum())

    def add(self, u, index: int | None = None) -> "MomentAccumulator":
        """Accumulate one matrix under the given sample index.

        ``index`` defaults to the running count, which matches the sample
        index in serial use; parallel callers must pass the stream index.
        """
        u = np.asarray(u, dtype=complex)
        if u.shape != (self.dim, self.dim):
            raise ValueError(f"expected shape {(self.dim, self.dim)}, got {u.shape}")
        if index is None:
            index = self.count
        b = int(index) % self.n_batches
        self._counts[b] += 1
        self._sums[b] += u
        self._sq_sums[b] += u.real**2 + u.imag**2
        return self

    def add_batch(self, us, indices) -> "MomentAccumulator":
        """Accumulate a stack of matrices (B, M, M) under their sample indices."""
        us = np.asarray(us, dtype=complex)
        indices = np.asarray(indices, dtype=np.int64)
        if us.ndim != 3 or us.shape[1:] != (self.dim, self.dim):
            raise ValueError(f"expected shape (B, {self.dim}, {self.dim}), got {us.shape}")
        if indices.shape != (us.shape[0],):
            raise ValueError("need one index per matrix")
        b = indices % self.n_batches
        np.add.at(self._counts, b, 1)
        np.add.at(self._sums, b, us)
        np.add.at(self._sq_sums, b, us.real**2 + us.imag**2)
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        """Batchwise sum with another accumulator (returns a new one)."""
        if not isinstance(other, MomentAccumulator):
            raise TypeError("can only merge MomentAccumulator instances")
        if (self.dim, self.n_batches) != (other.dim, other.n_batches):
            raise ValueError("accumulators have mismatched dim or batch count")
        out = MomentAccumulator(self.dim, self.n_batches)
        out._counts = self._counts + other._counts
        out._sums = self._sums + other._sums
        out._sq_sums = self._sq_sums + other._sq_sums
        return out

    @property
    def mean(self) -> np.ndarray:
        if self.count == 0:
            raise ValueError("empty accumulator has no mean")
        return self._sums.sum(axis=0) / self.count

    def variance_matrix(self) -> np.ndarray:
        """Elementwise variance <|u|^2> - |<u>|^2 (real, clipped at zero)."""
        if self.count == 0:
            raise ValueError("empty accumulator has no variance")
        return _variance(self.count, self._sums.sum(axis=0), self._sq_sums.sum(axis=0))

    def _live_batches(self) -> np.ndarray:
        return np.nonzero(self._counts)[0]

    def _leave_out(self, b: int):
        count = self.count - int(self._counts[b])
        sums = self._sums.sum(axis=0) - self._sums[b]
        sq_sums = self._sq_sums.sum(axis=0) - self._sq_sums[b]
        return count, sums, sq_sums


def _variance(count, sums, sq_sums) -> np.ndarray:
    mean = sums / count
    raw = sq_sums / count - (mean.real**2 + mean.imag**2)
    if raw.min() < _VARIANCE_FLOOR:
        raise RuntimeError(f"variance {raw.min():.3e} below the numerical floor; accumulator corrupted")
    return np.clip(raw, 0.0, None)


def _jackknife(acc: MomentAccumulator, stat) -> float:
    """Delete-one-batch jackknife standard error of stat(count, sums, sq_sums)."""
    live = acc._live_batches()
    if live.size < 2:
        return 0.0
    values = np.array([stat(*acc._leave_out(b)) for b in live])
    n = live.size
    return float(np.sqrt((n - 1) / n * np.sum((values - values.mean()) ** 2)))


def s_n(acc: MomentAccumulator) -> EstimateWithError:
    """Frobenius norm of the variance-matrix of the accumulated operator.

    The self-averaging diagnostic: it vanishes as the operator becomes
    deterministic.  The standard error is a delete-one-batch jackknife.
    """
    if acc.count < 2:
        raise ValueError(f"need at least 2 samples, have {acc.count}")

    def stat(count, sums, sq_sums):
        return float(np.linalg.norm(_variance(count, sums, sq_sums)))

    value = stat(acc.count, acc._sums.sum(axis=0), acc._sq_sums.sum(axis=0))
    return EstimateWithError(value, _jackknife(acc, stat), acc.count)


def d_n(acc: MomentAccumulator, reference) -> EstimateWithError:
    """Frobenius distance between the accumulated mean and a reference operator."""
    if acc.count < 2:
        raise ValueError(f"need at least 2 samples, have {acc.count}")
    reference = np.asarray(reference, dtype=complex)
    if reference.shape != (acc.dim, acc.dim):
        raise ValueError(f"reference shape {reference.shape} does not match dim {acc.dim}")

    def stat(count, sums, sq_sums):
        return frobenius_norm(sums / count - reference)

    value = stat(acc.count, acc._sums.sum(axis=0), acc._sq_sums.sum(axis=0))
    return EstimateWithError(value, _jackknife(acc, stat), acc.count)


def _block_moments(task):
    config, seed, start, stop, n_batches, include_h = task
    indices = np.arange(start, stop, dtype=np.int64)
    acc = MomentAccumulator(config.spec.dim, n_batches)
    acc_h = MomentAccumulator(config.spec.dim, n_batches) if include_h else None
    if qubit_kernels.supports(config):
        if include_h:
            us, hs = qubit_kernels.propagate_block(config, seed, indices, include_effective_h=True)
            acc_h.add_batch(hs, indices)
        else:
            us = qubit_kernels.propagate_block(config, seed, indices)
        acc.add_batch(us, indices)
    else:
        tau = config.total_time
        for idx in indices:
            u = evolve(sample_realization(config, RngStream(seed, int(idx))))
            acc.add(u, int(idx))
            if include_h:
                acc_h.add(principal_log_unitary(u) / tau, int(idx))
    return acc, acc_h


def collect_moments(
    config: ProtocolConfig,
    n_samples: int,
    seed: int,
    *,
    stream_offset: int = 0,
    n_batches: int = DEFAULT_BATCHES,
    workers: int = 1,
    include_effective_h: bool = False,
):
    """Accumulate moments of the evolution operator over per-sample streams.

    Sample j draws from RngStream(seed, stream_offset + j).  Returns the
    operator accumulator, or a (operator, effective-Hamiltonian) pair when
    ``include_effective_h`` is set.  Output is bitwise independent of
    ``workers``.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    if config.spec is None:
        raise ValueError("config has no ensemble spec to sample from")
    starts = range(stream_offset, stream_offset + n_samples, _BLOCK)
    tasks = [
        (config, seed, start, min(start + _BLOCK, stream_offset + n_samples), n_batches, include_effective_h)
        for start in starts
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block_moments, tasks))
    else:
        results = [_block_moments(t) for t in tasks]
    acc, acc_h = results[0]
    for part, part_h in results[1:]:
        acc = acc.merge(part)
        if include_effective_h:
            acc_h = acc_h.merge(part_h)
    return (acc, acc_h) if include_effective_h else acc


@dataclass(frozen=True)
class DeviationCheck:
    """Distance of an accumulated mean from a reference, judged against noise.

    ``noise_floor`` is the expected distance from pure Monte Carlo noise,
    sqrt(sum_ij Var_ij / n); the check passes when the measured deviation
    exceeds the floor by at most ``n_sigma`` jackknife standard errors of
    the excess.
    """

    deviation: float
    noise_floor: float
    excess: float
    std_error: float
    passed: bool


def deviation_from_reference(acc: MomentAccumulator, reference, n_sigma: float = 3.0) -> DeviationCheck:
    """Test whether the accumulated mean is statistically compatible with ``reference``."""
    reference = np.asarray(reference, dtype=complex)
    if reference.shape != (acc.dim, acc.dim):
        raise ValueError(f"reference shape {reference.shape} does not match dim {acc.dim}")

    def stat(count, sums, sq_sums):
        dev, floor = _excess_parts(count, sums, sq_sums, reference)
        return dev - floor

    deviation, floor = _excess_parts(acc.count, acc._sums.sum(axis=0), acc._sq_sums.sum(axis=0), reference)
    excess = deviation - floor
    std_error = _jackknife(acc, stat)
    return DeviationCheck(deviation, floor, excess, std_error, excess <= n_sigma * std_error)


def _excess_parts(count, sums, sq_sums, reference):
    mean = sums / count
    deviation = frobenius_norm(mean - reference)
    floor = float(np.sqrt(_variance(count, sums, sq_sums).sum() / count))
    return deviation, floor


@dataclass(frozen=True)
class ParityReport:
    """Deviation of <U_N> from the identity (and <H_eff> from zero) for even ensembles.

    ``noise_floor`` is the expected magnitude of the deviation from pure
    Monte Carlo noise, sqrt(sum_ij Var(U_ij) / n_samples); the test passes
    when the measured deviation exceeds the floor by at most three jackknife
    standard errors of the excess.
    """

    n_quenches: int
    n_samples: int
    deviation: float
    noise_floor: float
    excess: float
    excess_std_error: float
    passed: bool
    h_deviation: float
    h_noise_floor: float
    h_excess: float
    h_excess_std_error: float
    h_passed: bool
    mean_effective_hamiltonian: np.ndarray

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "n_quenches", "n_samples", "deviation", "noise_floor", "excess",
            "excess_std_error", "passed", "h_deviation", "h_noise_floor",
            "h_excess", "h_excess_std_error", "h_passed",
        )}
        mean_h = self.mean_effective_hamiltonian
        out["mean_effective_hamiltonian_re"] = mean_h.real.tolist()
        out["mean_effective_hamiltonian_im"] = mean_h.imag.tolist()
        return out


def parity_test_even_pdf(
    config: ProtocolConfig,
    n_samples: int,
    rng_base: RngStream,
    *,
    n_batches: int = DEFAULT_BATCHES,
    workers: int = 1,
    n_sigma: float = 3.0,
) -> ParityReport:
    """Statistical check that an even, time-independent ensemble averages to the identity.

    For a distribution symmetric under H -> -H the mean evolution operator
    equals the identity and the mean effective Hamiltonian vanishes for any
    number of quenches; this estimates both deviations and compares them
    with the Monte Carlo noise floor.  Samples draw from the streams
    (rng_base.seed, rng_base.stream_index + j).
    """
    spec = config.spec
    if spec is None:
        raise ValueError("config has no ensemble spec")
    if spec.kind == "custom-bounded":
        raise ValueError("parity test requires a Gaussian ensemble (evenness of a custom sampler is not verifiable)")
    if spec.mean_profile.kind != "iid-constant" or spec.mean_profile.mu != 0:
        raise ValueError(
            "parity test requires an even time-independent ensemble: "
            "iid-constant profile with mu = 0"
        )
    acc_u, acc_h = collect_moments(
        config,
        n_samples,
        rng_base.seed,
        stream_offset=rng_base.stream_index,
        n_batches=n_batches,
        workers=workers,
        include_effective_h=True,
    )
    u_check = deviation_from_reference(acc_u, np.eye(spec.dim), n_sigma)
    h_check = deviation_from_reference(acc_h, np.zeros((spec.dim, spec.dim)), n_sigma)
    return ParityReport(
        n_quenches=config.n_quenches,
        n_samples=acc_u.count,
        deviation=u_check.deviation,
        noise_floor=u_check.noise_floor,
        excess=u_check.excess,
        excess_std_error=u_check.std_error,
        passed=u_check.passed,
        h_deviation=h_check.deviation,
        h_noise_floor=h_check.noise_floor,
        h_excess=h_check.excess,
        h_excess_std_error=h_check.std_error,
        h_passed=h_check.passed,
        mean_effective_hamiltonian=acc_h.mean,
    )
