"""Scaling experiments over quench-number grids and power-law analysis.

``run_scaling`` produces the two self-averaging diagnostics as functions of
the number of quenches N:

* S_N -- Frobenius norm of the variance-matrix of the evolution operator;
* D_N -- Frobenius distance between the averaged evolution operator and the
  evolution generated by the averaged (step-like) Hamiltonian.

Both decay as a power of N; ``power_law_fit`` estimates the exponent by
ordinary least squares on the log-log points.  ``r_n_factor`` evaluates the
combinatorial factor 1 - N! / (N^n (N-n)!) that bounds the non-factorizing
fraction of index tuples in the moment expansions and decays as O(1/N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .ensembles import EnsembleSpec
from .estimators import DEFAULT_BATCHES, EstimateWithError, collect_moments, d_n, s_n
from .protocol import ProtocolConfig, mean_generated_evolution

# the power law is asymptotic; fits must target the top of the grid
DEFAULT_FIT_MIN = 16


def default_fit_range(n_grid) -> tuple:
    """Default fit window: the top quarter of the grid, never below N = 16.

    The decay reaches its asymptotic exponent only once N is well past the
    randomization crossover (N of order (sigma * tau)**2), so fitting from
    small N systematically flattens the slope; the default keeps the last
    two octaves of an octave-spaced grid.
    """
    top = max(int(n) for n in n_grid)
    return (min(max(DEFAULT_FIT_MIN, top // 4), top), top)


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through (log N, log value): value ~ e^intercept * N^slope."""

    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class ScalingSeries:
    """Estimates of one diagnostic over an N grid, with its power-law fit.

    ``fit`` is None when the fit was refused (degenerate data or too few
    usable points); ``fit_error`` then carries the reason.
    """

    quantity: str  # "S_N" or "D_N"
    points: tuple  # tuple of (n, EstimateWithError), sorted by n
    fit: Optional[PowerLawFit]
    fit_range: tuple
    fit_error: Optional[str] = None

    def __post_init__(self):
        ns = [n for n, _ in self.points]
        if ns != sorted(ns) or len(set(ns)) != len(ns):
            raise ValueError("points must be sorted by n with distinct n values")
        for _, est in self.points:
            if not (np.isfinite(est.value) and np.isfinite(est.std_error)):
                raise ValueError("all estimates must be finite")

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "points": [
                {"n": n, "value": e.value, "std_error": e.std_error, "n_samples": e.n_samples}
                for n, e in self.points
            ],
            "fit": None if self.fit is None else {
                "slope": self.fit.slope,
                "intercept": self.fit.intercept,
                "r_squared": self.fit.r_squared,
            },
            "fit_range": list(self.fit_range),
            "fit_error": self.fit_error,
        }


def power_law_fit(points: Sequence, fit_range) -> PowerLawFit:
    """Ordinary least squares on (log N, log value) restricted to fit_range.

    ``points`` is a sequence of (N, value); natural logarithms are used, so
    the slope is the power-law exponent.  Raises ValueError with fewer than
    3 points in range or any nonpositive value in range.
    """
    lo, hi = fit_range
    selected = [(n, v) for n, v in points if lo <= n <= hi]
    if len(selected) < 3:
        raise ValueError(f"need at least 3 points in the fit range, have {len(selected)}")
    if any(v <= 0 for _, v in selected):
        raise ValueError("nonpositive values in the fit range; no power law")
    x = np.log([float(n) for n, _ in selected])
    y = np.log([float(v) for _, v in selected])
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(float(slope), float(intercept), r_squared)


def r_n_factor(n: int, big_n: int) -> float:
    """The tuple-collision factor 1 - prod_{j=0}^{n-1} (N - j) / N, in [0, 1).

    Computed in product form (no factorials, no overflow).  R_1(N) = 0,
    R_2(N) = 1/N, and N * R_n(N) -> n(n-1)/2 as N grows.
    """
    if not isinstance(n, (int, np.integer)) or not isinstance(big_n, (int, np.integer)):
        raise ValueError("n and big_n must be integers")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n >= big_n:
        raise ValueError(f"requires big_n > n, got n={n}, big_n={big_n}")
    prod = 1.0
    for j in range(n):
        prod *= (big_n - j) / big_n
    return 1.0 - prod


# estimates at or below accumulated round-off on unit-norm operators carry
# no scaling information; the fit treats them as zeros
_DEGENERATE_VALUE = 1e-13


def _fit_series(quantity, points, fit_range) -> ScalingSeries:
    values = [(n, e.value if e.value > _DEGENERATE_VALUE else 0.0) for n, e in points]
    try:
        fit = power_law_fit(values, fit_range)
        return ScalingSeries(quantity, tuple(points), fit, tuple(fit_range))
    except ValueError as exc:
        return ScalingSeries(quantity, tuple(points), None, tuple(fit_range), fit_error=str(exc))


def run_scaling(
    spec: EnsembleSpec,
    tau: float,
    n_grid: Sequence[int],
    samples: int,
    seed: int,
    *,
    fit_range=None,
    workers: int = 1,
    n_batches: int = DEFAULT_BATCHES,
):
    """S_N and D_N series over a grid of quench numbers, with power-law fits.

    For each N the evolution operator is sampled ``samples`` times (streams
    are allocated in disjoint blocks per grid point, so the run is fully
    reproducible from the seed) and compared against the evolution generated
    by the step-like mean Hamiltonian at the same N.  Returns the pair
    (S_N series, D_N series).
    """
    ns = sorted({int(n) for n in n_grid})
    if len(ns) != len(list(n_grid)):
        raise ValueError("n_grid must not contain duplicates")
    if not ns or ns[0] < 1:
        raise ValueError("n_grid must contain positive integers")
    if fit_range is None:
        fit_range = default_fit_range(ns)
    s_points, d_points = [], []
    for i, n in enumerate(ns):
        config = ProtocolConfig(spec, tau, n)
        acc = collect_moments(
            config, samples, seed, stream_offset=i * samples, n_batches=n_batches, workers=workers
        )
        reference = mean_generated_evolution(config)
        s_points.append((n, s_n(acc)))
        d_points.append((n, d_n(acc, reference)))
    return _fit_series("S_N", s_points, fit_range), _fit_series("D_N", d_points, fit_range)


def write_series_csv(series: ScalingSeries, path) -> None:
    """Write a series as CSV with header ``N,value,std_error``.

    '.' decimal separator, '\\n' line endings and repr-precision floats, so
    identical runs produce identical bytes.
    """
    lines = ["N,value,std_error"]
    for n, est in series.points:
        lines.append(f"{n},{float(est.value)!r},{float(est.std_error)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii", newline="")


def weak_monotonicity_violations(series: ScalingSeries, start: int = DEFAULT_FIT_MIN, n_sigma: float = 2.0):
    """Adjacent increases beyond ``n_sigma`` combined standard errors, from N >= start.

    Returns the list of offending (n_prev, n_next) pairs; empty means the
    series is non-increasing within statistical noise, as an O(1/N) decay
    implies.
    """
    pts = [(n, e) for n, e in series.points if n >= start]
    bad = []
    for (n_a, e_a), (n_b, e_b) in zip(pts, pts[1:]):
        tolerance = n_sigma * math.hypot(e_a.std_error, e_b.std_error)
        if e_b.value > e_a.value + tolerance:
            bad.append((n_a, n_b))
    return bad
