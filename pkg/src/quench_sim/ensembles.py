"""Time-indexed random Hermitian matrix ensembles.

An ensemble assigns to every time ``t`` in the driving interval a
distribution over Hermitian matrices.  Three families are provided:

* ``gaussian-pauli`` -- qubit Hamiltonians ``H = (1/2) alpha . sigma`` where
  the three components of ``alpha`` are independent normals with common
  spread ``sigma`` and a time-dependent mean vector from a
  :class:`MeanProfile`.
* ``gaussian-gue`` -- M x M Hermitian matrices with independent normal
  entries (diagonal variance ``sigma**2``, off-diagonal real/imaginary
  variance ``sigma**2 / 2``) added to the analytic mean matrix.
* ``custom-bounded`` -- a caller-supplied sampler with bounded support; the
  bound is declared by a mandatory ``truncation_radius``.

Setting ``truncation_radius`` on the Gaussian families turns them into
bounded-support ensembles by rejection sampling.  Sampling consumes exactly
three standard normals per qubit draw (``alpha_1, alpha_2, alpha_3``) and,
for ``gaussian-gue``, M**2 standard normals per draw (diagonal, then upper
real, then upper imaginary, row-major); this draw order is relied upon by
the vectorized kernels and must not change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .linalg import PAULI, commutator, frobenius_norm, is_hermitian

ENSEMBLE_KINDS = ("gaussian-pauli", "gaussian-gue", "custom-bounded")
PROFILE_KINDS = ("iid-constant", "harmonic-commuting", "harmonic-noncommuting")

# Rejection sampling gives up after this many consecutive rejected draws,
# signalling a pathological spec (acceptance rate below ~1e-5 per window).
_REJECTION_ATTEMPTS = 100_000


@dataclass(frozen=True)
class MeanProfile:
    """Time-dependent mean vector of the qubit ensemble.

    * ``iid-constant``: mu * (1, 0, 0) at every time; the x axis pins the
      otherwise free direction of the constant mean.
    * ``harmonic-commuting``: mu * (sin(omega t), 0, 0).
    * ``harmonic-noncommuting``: mu * (sin(omega t), cos(omega t), 0).

    ``omega`` is ignored by the ``iid-constant`` profile.
    """

    kind: str
    mu: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}; expected one of {PROFILE_KINDS}")
        if not (np.isfinite(self.mu) and self.mu >= 0):
            raise ValueError(f"mu must be a nonnegative finite real, got {self.mu!r}")
        if not np.isfinite(self.omega):
            raise ValueError(f"omega must be finite, got {self.omega!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "mu": self.mu, "omega": self.omega}

    @classmethod
    def from_dict(cls, data: dict) -> "MeanProfile":
        unknown = set(data) - {"kind", "mu", "omega"}
        if unknown:
            raise ValueError(f"unknown mean_profile keys: {sorted(unknown)}")
        if "kind" not in data:
            raise ValueError("mean_profile requires a 'kind'")
        return cls(kind=data["kind"], mu=float(data.get("mu", 0.0)), omega=float(data.get("omega", 0.0)))


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream addressed by (seed, stream_index).

    Identical pairs reproduce the identical draw sequence regardless of
    worker count or scheduling; distinct indices are independent streams
    (Philox counter jumps of 2**128 per index).
    """

    seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_index"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= int(value) < 2**64:
                raise ValueError(f"{name} must be an integer in [0, 2**64), got {value!r}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed).jumped(self.stream_index))


@dataclass(frozen=True)
class EnsembleSpec:
    """Description of a time-dependent matrix distribution.

    ``sampler`` and ``mean_fn`` apply to ``custom-bounded`` only:
    ``sampler(t, generator) -> Hermitian ndarray`` draws one matrix and
    ``mean_fn(t) -> Hermitian ndarray`` (optional) supplies the analytic
    mean when one is known.
    """

    dim: int
    kind: str
    mean_profile: MeanProfile
    sigma: float
    truncation_radius: Optional[float] = None
    sampler: Optional[Callable[[float, np.random.Generator], np.ndarray]] = None
    mean_fn: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; expected one of {ENSEMBLE_KINDS}")
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be a nonnegative finite real, got {self.sigma!r}")
        if self.truncation_radius is not None and not self.truncation_radius > 0:
            raise ValueError(f"truncation_radius must be positive, got {self.truncation_radius!r}")
        if self.kind == "gaussian-pauli" and self.dim != 2:
            raise ValueError("gaussian-pauli requires dim = 2")
        if self.kind == "gaussian-gue" and self.dim > 2 and self.mean_profile.mu != 0:
            raise ValueError(
                "gaussian-gue means are parameterized through the qubit profile; "
                "for dim > 2 only mu = 0 (zero mean matrix) is supported"
            )
        if self.kind == "custom-bounded":
            if self.sampler is None:
                raise ValueError("custom-bounded requires a sampler callable")
            if self.truncation_radius is None:
                raise ValueError("custom-bounded requires a truncation_radius declaring its support bound")
        elif self.sampler is not None or self.mean_fn is not None:
            raise ValueError("sampler/mean_fn are only valid for custom-bounded ensembles")

    def to_dict(self) -> dict:
        if self.kind == "custom-bounded":
            raise ValueError("custom-bounded ensembles hold callables and cannot be serialized to JSON")
        return {
            "dim": self.dim,
            "kind": self.kind,
            "mean_profile": self.mean_profile.to_dict(),
            "sigma": self.sigma,
            "truncation_radius": self.truncation_radius,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleSpec":
        allowed = {"dim", "kind", "mean_profile", "sigma", "truncation_radius"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown ensemble keys: {sorted(unknown)}")
        missing = {"dim", "kind", "mean_profile", "sigma"} - set(data)
        if missing:
            raise ValueError(f"ensemble requires keys: {sorted(missing)}")
        radius = data.get("truncation_radius")
        return cls(
            dim=int(data["dim"]),
            kind=data["kind"],
            mean_profile=MeanProfile.from_dict(data["mean_profile"]),
            sigma=float(data["sigma"]),
            truncation_radius=None if radius is None else float(radius),
        )


def pauli_hamiltonian(vec) -> np.ndarray:
    """(1/2) vec . sigma for a real 3-vector vec."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {vec.shape}")
    return 0.5 * np.tensordot(vec, PAULI, axes=1)


def mean_vector(profile: MeanProfile, t: float) -> np.ndarray:
    """Mean alpha-vector of the qubit family at time t (units 1/time)."""
    if profile.kind == "iid-constant":
        return np.array([profile.mu, 0.0, 0.0])
    wt = profile.omega * t
    if profile.kind == "harmonic-commuting":
        return np.array([profile.mu * math.sin(wt), 0.0, 0.0])
    return profile.mu * np.array([math.sin(wt), math.cos(wt), 0.0])


def _gue_mean_matrix(spec: EnsembleSpec, t: float) -> np.ndarray:
    if spec.dim == 2:
        return pauli_hamiltonian(mean_vector(spec.mean_profile, t))
    # dim > 2 implies mu = 0 (enforced at construction)
    return np.zeros((spec.dim, spec.dim), dtype=complex)


def mean_hamiltonian(spec: EnsembleSpec, t: float) -> np.ndarray:
    """Analytic ensemble mean at time t.

    Only untruncated Gaussian ensembles have a closed-form mean (rejection
    against a Frobenius ball shifts the moments); custom ensembles must
    supply ``mean_fn``.
    """
    if spec.kind == "custom-bounded":
        if spec.mean_fn is None:
            raise ValueError(
                "no analytic mean for this custom-bounded ensemble; estimate it by "
                "Monte Carlo (sample_hamiltonian into a MomentAccumulator)"
            )
        mean = np.asarray(spec.mean_fn(t), dtype=complex)
        if mean.shape != (spec.dim, spec.dim) or not is_hermitian(mean):
            raise ValueError("mean_fn must return a Hermitian matrix of the ensemble dimension")
        return mean
    if spec.truncation_radius is not None:
        raise ValueError(
            "analytic means are only available for untruncated ensembles; "
            "truncation shifts the moments, estimate them by Monte Carlo"
        )
    if spec.kind == "gaussian-pauli":
        return pauli_hamiltonian(mean_vector(spec.mean_profile, t))
    return _gue_mean_matrix(spec, t)


def _draw_pauli(spec: EnsembleSpec, t: float, gen: np.random.Generator) -> np.ndarray:
    alpha = mean_vector(spec.mean_profile, t) + spec.sigma * gen.standard_normal(3)
    return pauli_hamiltonian(alpha)


def _draw_gue(spec: EnsembleSpec, t: float, gen: np.random.Generator) -> np.ndarray:
    m = spec.dim
    h = _gue_mean_matrix(spec, t).copy()
    h[np.diag_indices(m)] += spec.sigma * gen.standard_normal(m)
    rows, cols = np.triu_indices(m, k=1)
    scale = spec.sigma / math.sqrt(2.0)
    re = scale * gen.standard_normal(rows.size)
    im = scale * gen.standard_normal(rows.size)
    h[rows, cols] += re + 1j * im
    h[cols, rows] += re - 1j * im
    return h


def sample_hamiltonian(spec: EnsembleSpec, t: float, rng) -> np.ndarray:
    """Draw one Hermitian matrix from the ensemble at time t.

    ``rng`` is either an :class:`RngStream` (a fresh generator is built, so
    the call returns the stream's first draw) or an ``np.random.Generator``
    that is consumed statefully, which is how multi-step realizations are
    built.
    """
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    if spec.kind == "gaussian-pauli":
        draw = _draw_pauli
    elif spec.kind == "gaussian-gue":
        draw = _draw_gue
    else:
        def draw(s, time, g):
            h = np.asarray(s.sampler(time, g), dtype=complex)
            if h.shape != (s.dim, s.dim):
                raise ValueError(f"custom sampler returned shape {h.shape}, expected {(s.dim, s.dim)}")
            if not is_hermitian(h):
                raise ValueError("custom sampler must return Hermitian matrices")
            return h

    if spec.truncation_radius is None:
        return draw(spec, t, gen)
    for _ in range(_REJECTION_ATTEMPTS):
        h = draw(spec, t, gen)
        if frobenius_norm(h) <= spec.truncation_radius:
            return h
    raise RuntimeError(
        f"truncation acceptance rate below 1e-4 over a {_REJECTION_ATTEMPTS}-draw window; "
        "the truncation_radius is pathologically small for this ensemble"
    )


def is_statistically_commuting(spec: EnsembleSpec, tau: float, grid_points: int, tol: float = 1e-10) -> bool:
    """Whether all pairs of mean Hamiltonians on a uniform time grid commute.

    The grid is the ``grid_points`` times k * tau / grid_points, k = 0, ...,
    grid_points - 1, covering [0, tau).  Commutation of the means at every
    pair of times (within ``tol`` in Frobenius norm) is the condition under
    which the averaged evolution is generated by the averaged Hamiltonian.
    """
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    if not tol >= 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    times = [k * tau / grid_points for k in range(grid_points)]
    means = [mean_hamiltonian(spec, t) for t in times]
    for a in range(len(means)):
        for b in range(a + 1, len(means)):
            if frobenius_norm(commutator(means[a], means[b])) > tol:
                return False
    return True
