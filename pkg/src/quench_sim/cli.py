"""Command-line experiment runner.

    quench-sim <experiment> --config <path> [--seed S] [--workers W] [--out DIR]

Experiments: ``scaling``, ``parity``, ``bch-verify``, ``convergence-report``,
``deterministic-convergence``.  Configuration is a single flat JSON document
(see recipes/); --seed, --workers and --out override the corresponding
config fields.  Every output JSON embeds the fully resolved configuration,
the seed and the dimensionless products sigma*tau, mu*tau, omega*tau, so a
run is reproducible from its artifacts alone.

Exit codes: 0 success, 2 configuration error, 3 numerical error (branch
ambiguity, pathological truncation), 4 a verify experiment ran but its
checks failed.  Configuration errors print one machine-parsable JSON line
on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import default_fit_range, power_law_fit, run_scaling, write_series_csv
from .bch import bch_order2, bch_p1, check_convergence_domain, log_oracle
from .ensembles import EnsembleSpec, RngStream, mean_hamiltonian, mean_vector
from .estimators import parity_test_even_pdf
from .linalg import BranchAmbiguityError, frobenius_norm, hermitian_part
from .protocol import ProtocolConfig, QuenchRealization, evolve_deterministic, sample_realization

EXPERIMENTS = (
    "scaling",
    "parity",
    "bch-verify",
    "convergence-report",
    "deterministic-convergence",
)

_DEFAULT_N_GRID = [2**k for k in range(4, 11)]
_DEFAULT_SAMPLES = 10_000
# reference step count for continuous-limit evolutions
_N_REF = 2**15

_CONFIG_KEYS = {
    "experiment", "ensemble", "tau", "n_grid", "samples", "seed",
    "workers", "fit_range", "output_dir",
}


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass
class RunConfig:
    experiment: str
    ensemble: EnsembleSpec
    tau: float
    seed: int
    n_grid: list
    samples: int
    workers: int
    fit_range: tuple
    output_dir: str

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "ensemble": self.ensemble.to_dict(),
            "tau": self.tau,
            "n_grid": list(self.n_grid),
            "samples": self.samples,
            "seed": self.seed,
            "workers": self.workers,
            "fit_range": list(self.fit_range),
            "output_dir": self.output_dir,
        }

    def dimensionless(self) -> dict:
        profile = self.ensemble.mean_profile
        return {
            "sigma_tau": self.ensemble.sigma * self.tau,
            "mu_tau": profile.mu * self.tau,
            "omega_tau": profile.omega * self.tau,
        }


def load_run_config(
    path,
    experiment: str,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    out: Optional[str] = None,
) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "experiment" in raw and raw["experiment"] != experiment:
        raise ConfigError(
            f"config is for experiment {raw['experiment']!r} but {experiment!r} was requested"
        )
    for key in ("ensemble", "tau"):
        if key not in raw:
            raise ConfigError(f"config requires {key!r}")
    try:
        ensemble = EnsembleSpec.from_dict(raw["ensemble"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid ensemble: {exc}") from None
    tau = float(raw["tau"])
    if not (math.isfinite(tau) and tau > 0):
        raise ConfigError(f"tau must be a positive finite real, got {raw['tau']!r}")
    n_grid = raw.get("n_grid", _DEFAULT_N_GRID)
    if (
        not isinstance(n_grid, list)
        or not n_grid
        or any(not isinstance(n, int) or n < 1 for n in n_grid)
        or len(set(n_grid)) != len(n_grid)
    ):
        raise ConfigError("n_grid must be a non-empty list of distinct positive integers")
    n_grid = sorted(n_grid)
    samples = raw.get("samples", _DEFAULT_SAMPLES)
    if not isinstance(samples, int) or samples < 1:
        raise ConfigError(f"samples must be a positive integer, got {samples!r}")
    if seed is None:
        seed = raw.get("seed")
    if seed is None:
        raise ConfigError("a seed is required (config key 'seed' or --seed)")
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    if workers is None:
        workers = raw.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError(f"workers must be a positive integer, got {workers!r}")
    fit_range = raw.get("fit_range")
    if fit_range is None:
        fit_range = default_fit_range(n_grid)
    elif (
        not isinstance(fit_range, list)
        or len(fit_range) != 2
        or any(not isinstance(v, int) or v < 1 for v in fit_range)
        or fit_range[0] > fit_range[1]
    ):
        raise ConfigError("fit_range must be a [N_min, N_max] pair of positive integers")
    output_dir = out if out is not None else raw.get("output_dir", ".")
    return RunConfig(
        experiment=experiment,
        ensemble=ensemble,
        tau=tau,
        seed=seed,
        n_grid=list(n_grid),
        samples=samples,
        workers=workers,
        fit_range=tuple(fit_range),
        output_dir=str(output_dir),
    )


def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="ascii")


def _summary_base(cfg: RunConfig) -> dict:
    return {
        "experiment": cfg.experiment,
        "config": cfg.to_dict(),
        "dimensionless": cfg.dimensionless(),
    }


def cmd_scaling(cfg: RunConfig) -> int:
    if cfg.ensemble.truncation_radius is not None:
        raise ConfigError(
            "scaling compares against the evolution of the analytic mean, which "
            "truncated ensembles do not have; drop truncation_radius"
        )
    s_series, d_series = run_scaling(
        cfg.ensemble, cfg.tau, cfg.n_grid, cfg.samples, cfg.seed,
        fit_range=cfg.fit_range, workers=cfg.workers,
    )
    out = _out_dir(cfg)
    write_series_csv(s_series, out / "s_n.csv")
    write_series_csv(d_series, out / "d_n.csv")
    summary = _summary_base(cfg)
    summary["s_n"] = s_series.to_dict()
    summary["d_n"] = d_series.to_dict()
    _write_json(out / "summary.json", summary)
    return 0


def cmd_parity(cfg: RunConfig) -> int:
    profile = cfg.ensemble.mean_profile
    if cfg.ensemble.kind == "custom-bounded" or profile.kind != "iid-constant" or profile.mu != 0:
        raise ConfigError(
            "parity requires an even time-independent Gaussian ensemble "
            "(iid-constant profile with mu = 0)"
        )
    results = []
    for i, n in enumerate(cfg.n_grid):
        config = ProtocolConfig(cfg.ensemble, cfg.tau, n)
        report = parity_test_even_pdf(
            config, cfg.samples, RngStream(cfg.seed, i * cfg.samples), workers=cfg.workers
        )
        results.append(report.to_dict())
    all_passed = all(r["passed"] and r["h_passed"] for r in results)
    summary = _summary_base(cfg)
    summary["results"] = results
    summary["all_passed"] = all_passed
    _write_json(_out_dir(cfg) / "parity.json", summary)
    return 0 if all_passed else 4


def _random_hermitian(gen: np.random.Generator, dim: int) -> np.ndarray:
    a = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    return hermitian_part(a)


def _commuting_suite(dim: int, seed: int, n_cases: int = 25) -> dict:
    """Diagonal (hence commuting) realizations: order-1 truncation is exact."""
    gen = np.random.Generator(np.random.Philox(seed))
    worst = 0.0
    for i in range(n_cases):
        n = 2 + i % 4
        config = ProtocolConfig(None, 1.0, n)
        diags = gen.standard_normal((n, dim))
        hams = np.stack([np.diag(d.astype(complex)) for d in diags])
        realization = QuenchRealization(hams, config)
        worst = max(worst, frobenius_norm(log_oracle(realization) - bch_p1(realization)))
    return {"n_cases": n_cases, "max_deviation": worst, "tolerance": 1e-9, "passed": worst <= 1e-9}


def _remainder_suite(dim: int, seed: int, n_cases: int = 100) -> dict:
    """Random small-norm realizations: the order-2 remainder must be cubic.

    The suite runs on the unit interval so the step norms equal the
    expansion parameter s; each case is rerun with all steps halved and the
    remainder must shrink by at least 6x (a cubic term shrinks by 8x).
    """
    gen = np.random.Generator(np.random.Philox(seed))
    scales = np.exp(np.linspace(math.log(0.0125), math.log(0.1), n_cases))
    residuals, ratios = [], []
    for i, s in enumerate(scales):
        n = 2 + i % 4
        config = ProtocolConfig(None, 1.0, n)
        hams = []
        for _ in range(n):
            h = _random_hermitian(gen, dim)
            hams.append(h * (s / frobenius_norm(h)))
        hams = np.stack(hams)
        realization = QuenchRealization(hams, config)
        halved = QuenchRealization(0.5 * hams, config)
        residual = frobenius_norm(log_oracle(realization) - bch_order2(realization))
        residual_half = frobenius_norm(log_oracle(halved) - bch_order2(halved))
        residuals.append((float(s), residual))
        ratios.append(residual / residual_half if residual_half > 0 else math.inf)
    fitted_c = max(res / s**3 for s, res in residuals)
    fit = power_law_fit(residuals, (0.0, math.inf))
    min_ratio = min(ratios)
    passed = math.isfinite(fitted_c) and min_ratio >= 6.0
    return {
        "n_cases": n_cases,
        "fitted_constant": fitted_c,
        "remainder_order": fit.slope,
        "min_halving_ratio": min_ratio,
        "passed": passed,
    }


def _certificate_stats(cfg: RunConfig, n: int, stream_offset: int) -> dict:
    """Fraction of realizations outside the certified convergence ball."""
    spec, tau = cfg.ensemble, cfg.tau
    config = ProtocolConfig(spec, tau, n)
    margins = np.empty(cfg.samples)
    if spec.kind == "gaussian-pauli" and spec.truncation_radius is None:
        # ||(1/2) alpha . sigma|| = |alpha| / sqrt(2); avoids building matrices
        mus = np.stack([mean_vector(spec.mean_profile, t) for t in config.quench_times()])
        base = np.random.Philox(cfg.seed)
        for j in range(cfg.samples):
            raw = np.random.Generator(base.jumped(stream_offset + j)).standard_normal((n, 3))
            norms = np.linalg.norm(mus + spec.sigma * raw, axis=1) / math.sqrt(2.0)
            margins[j] = 1.0 - norms.max() * tau
    else:
        for j in range(cfg.samples):
            realization = sample_realization(config, RngStream(cfg.seed, stream_offset + j))
            margins[j] = check_convergence_domain(realization).margin
    return {
        "n_quenches": n,
        "n_realizations": cfg.samples,
        "fail_rate": float(np.mean(margins <= 0)),
        "margin_mean": float(margins.mean()),
        "margin_min": float(margins.min()),
        "margin_max": float(margins.max()),
    }


def cmd_bch_verify(cfg: RunConfig) -> int:
    dim = cfg.ensemble.dim
    commuting = _commuting_suite(dim, cfg.seed)
    remainder = _remainder_suite(dim, cfg.seed + 1)
    certificates = [
        _certificate_stats(cfg, n, i * cfg.samples) for i, n in enumerate(cfg.n_grid)
    ]
    all_passed = commuting["passed"] and remainder["passed"]
    summary = _summary_base(cfg)
    summary["commuting_suite"] = commuting
    summary["remainder_suite"] = remainder
    summary["convergence_certificate"] = certificates
    summary["all_passed"] = all_passed
    _write_json(_out_dir(cfg) / "bch_verify.json", summary)
    return 0 if all_passed else 4


def cmd_convergence_report(cfg: RunConfig) -> int:
    certificates = [
        _certificate_stats(cfg, n, i * cfg.samples) for i, n in enumerate(cfg.n_grid)
    ]
    summary = _summary_base(cfg)
    summary["convergence_certificate"] = certificates
    _write_json(_out_dir(cfg) / "convergence_report.json", summary)
    return 0


def cmd_deterministic_convergence(cfg: RunConfig) -> int:
    try:
        h_of_t = lambda t: mean_hamiltonian(cfg.ensemble, t)  # noqa: E731
        h_of_t(0.0)
    except ValueError as exc:
        raise ConfigError(f"deterministic-convergence needs an analytic mean: {exc}") from None
    ns = sorted(cfg.n_grid)
    n_ref = max(_N_REF, 2 * ns[-1])
    reference = evolve_deterministic(h_of_t, ProtocolConfig(cfg.ensemble, cfg.tau, n_ref))
    rows, previous = [], None
    for n in ns:
        u = evolve_deterministic(h_of_t, ProtocolConfig(cfg.ensemble, cfg.tau, n))
        distance = frobenius_norm(u - reference)
        step = "" if previous is None else repr(frobenius_norm(u - previous))
        rows.append((n, distance, step))
        previous = u
    out = _out_dir(cfg)
    lines = ["N,distance_to_reference,diff_from_previous"]
    lines += [f"{n},{d!r},{s}" for n, d, s in rows]
    (out / "deterministic_convergence.csv").write_text("\n".join(lines) + "\n", encoding="ascii", newline="")
    summary = _summary_base(cfg)
    summary["n_ref"] = n_ref
    summary["points"] = [
        {"n": n, "distance_to_reference": d, "diff_from_previous": None if s == "" else float(s)}
        for n, d, s in rows
    ]
    _write_json(out / "deterministic_convergence.json", summary)
    return 0


_COMMANDS = {
    "scaling": cmd_scaling,
    "parity": cmd_parity,
    "bch-verify": cmd_bch_verify,
    "convergence-report": cmd_convergence_report,
    "deterministic-convergence": cmd_deterministic_convergence,
}


def _emit_error(message: str, code: int) -> None:
    print(json.dumps({"error": message, "exit_code": code}), file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quench-sim",
        description="Random sudden-quench evolution experiments: scaling, parity and expansion checks.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--workers", type=int, default=None, help="override the worker count")
        p.add_argument("--out", default=None, help="override the output directory")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config, args.experiment, seed=args.seed, workers=args.workers, out=args.out)
        return _COMMANDS[cfg.experiment](cfg)
    except ConfigError as exc:
        _emit_error(str(exc), 2)
        return 2
    except (BranchAmbiguityError, RuntimeError) as exc:
        _emit_error(f"numerical error: {exc}", 3)
        return 3


def entrypoint() -> None:
    raise SystemExit(main())
