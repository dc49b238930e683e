"""Finite-N Monte Carlo models of products of free operators.

A factor is ``X = U D`` with ``U`` Haar orthogonal (or unitary) and ``D``
diagonal holding square roots of points of the target law of ``X*X``.  In
quantile mode the points are the deterministic quantiles ``(i + 1/2) / N``,
so the spectrum of ``X*X`` is fixed and only the rotations are random.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np
from scipy import linalg

from .errors import DomainError
from .lyapunov import ExponentDistribution, exponent_cdf, integrated_exponent, marginal_exponent
from .spectral_measures import MpParameters, SpectralMeasure

_SPECTRUM, _GROWTH, _COMPRESS, _RANK = range(4)
_DEAD_TOL = 1e3


@dataclass
class EnsembleConfig:
    N: int = 256
    steps_n: int = 200
    trials: int = 1
    seed: int = 0
    singular_law: Union[MpParameters, SpectralMeasure] = field(default_factory=lambda: MpParameters(1.0))
    t_list: Sequence[float] = ()
    compress_t: Sequence[float] = ()
    mode: str = "quantile"
    field: str = "real"
    ks_gate: float = 0.08
    workers: int = 1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"N must be an integer >= 2, got {self.N}")
        if self.steps_n < 1 or self.trials < 1:
            raise DomainError("steps_n and trials must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.mode not in ("quantile", "sample"):
            raise DomainError(f"mode must be 'quantile' or 'sample', got {self.mode!r}")
        if self.field not in ("real", "complex"):
            raise DomainError(f"field must be 'real' or 'complex', got {self.field!r}")
        for t in list(self.t_list) + list(self.compress_t):
            if not 0 < t <= 1:
                raise DomainError(f"projection dimension {t} outside (0, 1]")
        self.t_list = tuple(float(t) for t in self.t_list)
        self.compress_t = tuple(float(t) for t in self.compress_t)

    @cached_property
    def measure(self) -> SpectralMeasure:
        law = self.singular_law
        return law.measure() if isinstance(law, MpParameters) else law

    @cached_property
    def quantile_values(self) -> np.ndarray:
        """Squared singular values in quantile mode, ascending."""
        p = (np.arange(self.N) + 0.5) / self.N
        return np.maximum(self.measure.quantile(p), 0.0)

    def to_dict(self) -> dict:
        from .io import measure_to_dict
        law = self.singular_law
        if isinstance(law, MpParameters):
            law_d = {"mp": {"lambda": law.lam, "t": law.t}}
        else:
            law_d = {"measure": measure_to_dict(law)}
        return {"N": self.N, "steps_n": self.steps_n, "trials": self.trials, "seed": self.seed,
                "singular_law": law_d, "t_list": list(self.t_list),
                "compress_t": list(self.compress_t), "mode": self.mode, "field": self.field,
                "ks_gate": self.ks_gate, "workers": self.workers}

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleConfig":
        from .io import load_measure, measure_from_dict
        d = dict(d)
        d.pop("schema_version", None)
        law = d.pop("singular_law", {"mp": {"lambda": 1.0}})
        if "mp" in law:
            law = MpParameters(float(law["mp"]["lambda"]), law["mp"].get("t"))
        elif "measure" in law:
            law = measure_from_dict(law["measure"])
        elif "measure_file" in law:
            law = load_measure(law["measure_file"])
        else:
            raise DomainError("singular_law needs one of 'mp', 'measure', 'measure_file'")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown config keys {sorted(unknown)}")
        return cls(singular_law=law, **d)


@dataclass
class McReport:
    empirical_exponents: np.ndarray
    exponent_stderr: np.ndarray
    growth_rates: Dict[float, float]
    growth_stderr: Dict[float, float]
    ks_distance: float
    compression_ks: Dict[float, float]
    compression_support: Dict[float, tuple]
    wall_time: float = 0.0

    def gate(self, ks_gate: float) -> bool:
        vals = [self.ks_distance] + list(self.compression_ks.values())
        return all(v <= ks_gate for v in vals if not math.isnan(v))

    def to_dict(self) -> dict:
        """Deterministic content; wall time is left out so reruns hash equal."""
        return {"empirical_exponents": self.empirical_exponents,
                "exponent_stderr": self.exponent_stderr,
                "growth_rates": {repr(t): v for t, v in self.growth_rates.items()},
                "growth_stderr": {repr(t): v for t, v in self.growth_stderr.items()},
                "ks_distance": self.ks_distance,
                "compression_ks": {repr(t): v for t, v in self.compression_ks.items()},
                "compression_support": {repr(t): list(v) for t, v in self.compression_support.items()}}


# -- sampling -------------------------------------------------------------------

def trial_rng(seed: int, trial: int, purpose: int = _SPECTRUM) -> np.random.Generator:
    """Independent stream per (seed, trial, purpose); adding trials never reshuffles."""
    return np.random.default_rng([int(seed), int(trial), int(purpose)])


def haar_matrix(n: int, rng: np.random.Generator, field: str = "real") -> np.ndarray:
    """Haar orthogonal/unitary matrix: QR of a Gaussian with the R diagonal made positive."""
    if field == "real":
        g = rng.standard_normal((n, n))
    else:
        g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def squared_singular_values(config: EnsembleConfig, rng: np.random.Generator) -> np.ndarray:
    if config.mode == "quantile":
        return config.quantile_values
    return np.maximum(config.measure.quantile(rng.random(config.N)), 0.0)


def singular_values(config: EnsembleConfig, rng: np.random.Generator) -> np.ndarray:
    return np.sqrt(squared_singular_values(config, rng))


def sample_factor(config: EnsembleConfig, rng: np.random.Generator) -> np.ndarray:
    """One factor X = U D whose X*X has the configured spectrum."""
    d = singular_values(config, rng)
    return haar_matrix(config.N, rng, config.field) * d


# -- QR accumulation --------------------------------------------------------------

class _Frame:
    """Orthonormal frame pushed through a product, with kernel bookkeeping.

    Columns whose scale factor collapses to rounding level are marked dead
    (exponent -inf) and moved to the back by one pivoted QR, after which the
    live block stays in front.
    """

    def __init__(self, q: np.ndarray):
        self.q = q
        self.acc = np.zeros(q.shape[1])
        self.live = q.shape[1]

    def push(self, x: np.ndarray) -> None:
        y = x @ self.q
        q, r = linalg.qr(y, mode="economic")
        diag = np.abs(np.diagonal(r))
        scale = max(float(np.max(diag)), np.finfo(float).tiny)
        tol = _DEAD_TOL * y.shape[0] * np.finfo(float).eps * scale
        dead = diag[:self.live] <= tol
        if np.any(dead):
            q, r, piv = linalg.qr(y, mode="economic", pivoting=True)
            diag = np.abs(np.diagonal(r))
            self.acc = self.acc[piv]
            # pivoting orders by remaining norm, so the live block is a prefix
            self.live = min(self.live, int(np.sum(diag > tol)))
        with np.errstate(divide="ignore"):
            self.acc[:self.live] += np.log(diag[:self.live])
        self.acc[self.live:] = -np.inf
        self.q = q


def _spectrum_trial(config: EnsembleConfig, trial: int, factors=None) -> np.ndarray:
    rng = trial_rng(config.seed, trial, _SPECTRUM)
    frame = _Frame(np.eye(config.N, dtype=complex if config.field == "complex" else float))
    n = config.steps_n if factors is None else len(factors)
    for k in range(n):
        frame.push(sample_factor(config, rng) if factors is None else factors[k])
    return np.sort(frame.acc / n)[::-1]


def _map_trials(fn, config: EnsembleConfig, args: Sequence):
    if config.workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            return list(ex.map(fn, [config] * len(args), args))
    return [fn(config, a) for a in args]


def lyapunov_spectrum_qr(config: EnsembleConfig):
    """Finite-N exponents, sorted descending and averaged over trials.

    Returns (exponents, standard error, per-trial array).  Kernel directions
    carry the exponent -inf; their standard error is reported as 0.
    """
    per_trial = np.array(_map_trials(_spectrum_trial, config, range(config.trials)))
    mean = per_trial.mean(axis=0)
    if config.trials > 1:
        with np.errstate(invalid="ignore"):
            se = per_trial.std(axis=0, ddof=1) / math.sqrt(config.trials)
        se = np.where(np.isfinite(mean), se, 0.0)
    else:
        se = np.full(config.N, np.nan)
    return mean, se, per_trial


def spectrum_from_factors(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Exponents of the product factors[-1] ... factors[0], sorted descending."""
    cfg = EnsembleConfig(N=factors[0].shape[0], steps_n=len(factors))
    return _spectrum_trial(cfg, 0, factors)


def _growth_trial(config: EnsembleConfig, trial_t) -> float:
    trial, t = trial_t
    k = int(math.floor(t * config.N))
    rng = trial_rng(config.seed, trial, _GROWTH)
    frame = _Frame(haar_matrix(config.N, rng, config.field)[:, :k])
    for _ in range(config.steps_n):
        frame.push(sample_factor(config, rng))
    return float(np.sum(frame.acc[:frame.live])) / (config.steps_n * config.N)


def projected_growth(config: EnsembleConfig, t: float, return_trials: bool = False):
    """(1/(n N)) log det(Pi_n P_t) for a Haar-rotated rank-floor(tN) projection.

    The determinant is the product of the non-zero singular values, so kernel
    directions of the factors drop out rather than sending the rate to -inf.
    """
    if not t * config.N >= 1:
        raise DomainError(f"t N = {t * config.N} must be at least 1")
    vals = np.array(_map_trials(_growth_trial, config, [(i, t) for i in range(config.trials)]))
    return (float(vals.mean()), vals) if return_trials else float(vals.mean())


def projected_rank(config: EnsembleConfig, t: float, steps: int = 1, trial: int = 0) -> int:
    """Numerical rank of X_steps ... X_1 P_t for a Haar rank-floor(tN) projection."""
    rng = trial_rng(config.seed, trial, _RANK)
    k = int(math.floor(t * config.N))
    y = haar_matrix(config.N, rng, config.field)[:, :k]
    for _ in range(steps):
        y = sample_factor(config, rng) @ y
    return int(np.linalg.matrix_rank(y))


def compress_spectrum(config: EnsembleConfig, t: float, full_space: bool = False) -> np.ndarray:
    """Eigenvalues of P (O Lambda O*) P on the range of P, pooled over trials.

    ``Lambda`` holds the squared singular values of one factor.  With
    ``full_space`` the N - floor(tN) zeros from the complement are included.
    """
    if not t * config.N >= 2:
        raise DomainError(f"t N = {t * config.N} must be at least 2")
    k = int(math.floor(t * config.N))
    out = []
    for trial in range(config.trials):
        rng = trial_rng(config.seed, trial, _COMPRESS)
        lam = squared_singular_values(config, rng)
        if k == config.N:
            ev = np.sort(lam)
        else:
            o = haar_matrix(config.N, rng, config.field)[:k, :]
            ev = linalg.eigvalsh((o * lam) @ o.conj().T)
        out.append(ev)
        if full_space:
            out.append(np.zeros(config.N - k))
    return np.sort(np.concatenate(out))


def restricted_cdf(mu_t: SpectralMeasure, t: float) -> Callable:
    """CDF of the compressed law seen on the range of the projection."""
    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.clip((mu_t.cdf(x) - (1.0 - t) * (x >= 0)) / t, 0.0, 1.0)
    return cdf


def ks_distance(sample: Sequence[float], cdf: Union[ExponentDistribution, Callable],
                atol: float = 1e-9) -> float:
    """Sup distance between the empirical CDF of ``sample`` and ``cdf``.

    The reference CDF is read at ``x +- atol`` on the side that favours the
    sample, so points sitting on a jump of the reference up to rounding (e.g.
    exponents of an isometry at 0) are not penalised.  For a continuous
    reference this is the usual two-sided statistic.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    if x.size == 0:
        raise DomainError("empty sample")
    if isinstance(cdf, ExponentDistribution):
        ref = cdf
        fn = lambda v: np.interp(v, ref.x_grid, ref.cdf_values, left=0.0, right=1.0)  # noqa: E731
    else:
        fn = cdf
    n = x.size
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - np.asarray(fn(x + atol), dtype=float))
    d_minus = np.max(np.asarray(fn(x - atol), dtype=float) - (i - 1) / n)
    return float(np.clip(max(d_plus, d_minus), 0.0, 1.0))


def exponent_ks(exponents: np.ndarray, mu: SpectralMeasure) -> float:
    """KS against the analytic distribution; kernel exponents count at 0."""
    x = np.where(np.isfinite(exponents), exponents, 0.0)
    return ks_distance(x, exponent_cdf(mu))


def analytic_marginal(mu: SpectralMeasure, N: int) -> np.ndarray:
    """f((k - 1/2) / N) for k = 1..N, the analytic counterpart of sorted exponents."""
    r = mu.rank
    out = np.empty(N)
    for k in range(N):
        t = (k + 0.5) / N
        out[k] = 0.0 if t > r else (-np.inf if t == r else marginal_exponent(mu, t))
    return out


def run_mc(config: EnsembleConfig, spectrum: bool = True) -> McReport:
    start = time.perf_counter()
    mu = config.measure
    if spectrum:
        exps, se, _ = lyapunov_spectrum_qr(config)
        ks = exponent_ks(exps, mu)
    else:
        exps, se, ks = np.zeros(0), np.zeros(0), math.nan
    growth, growth_se = {}, {}
    for t in config.t_list:
        mean, vals = projected_growth(config, t, return_trials=True)
        growth[t] = mean
        growth_se[t] = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else math.nan
    comp_ks, comp_support = {}, {}
    for t in config.compress_t:
        ev = compress_spectrum(config, t)
        mu_t = MpParameters(config.singular_law.lam, t).measure() \
            if isinstance(config.singular_law, MpParameters) and config.singular_law.t is None else None
        comp_ks[t] = ks_distance(ev, restricted_cdf(mu_t, t)) if mu_t is not None else math.nan
        comp_support[t] = (float(ev[0]), float(ev[-1]))
    return McReport(exps, se, growth, growth_se, ks, comp_ks, comp_support,
                    time.perf_counter() - start)


def analytic_growth(mu: SpectralMeasure, t: float) -> float:
    return integrated_exponent(mu, t)
