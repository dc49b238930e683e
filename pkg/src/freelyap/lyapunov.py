"""Lyapunov exponents of products of free identically distributed operators.

All quantities depend only on the law ``mu_Y`` of ``Y = X*X``.  With
``r = 1 - mu_Y({0})``:

* marginal exponent  f(t) = -1/2 log S_Y(-t) for t < r, 0 for t > r;
* integrated exponent F(t) = 1/2 [ -int_{-t}^0 log(-psi_Y^{-1}(x)) dx
  + (1 - t) log(1 - t) + t log t ] for t <= r, saturating at F(r);
* distribution of exponents  F_dist(x) = |{t in [0, 1] : f(t) <= x}|.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate
from scipy.optimize import brentq
from scipy.special import xlogy

from .errors import BoundaryError, DomainError, HypothesisWarning, PreconditionError
from .spectral_measures import SpectralMeasure, log_integral, moment
from .transforms import (STransform, _expand_bracket, _psi_inverse_raw, _psi_raw,
                         _s_raw, s_at_rank_edge, s_of_z)

DEFAULT_T_POINTS = 199
DEFAULT_X_POINTS = 200
F_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class LyapunovProfile:
    t_grid: np.ndarray
    F_values: np.ndarray
    f_values: np.ndarray
    rank_r: float
    source_label: str = ""


@dataclass(frozen=True, eq=False)
class ExponentDistribution:
    x_grid: np.ndarray
    cdf_values: np.ndarray

    def __call__(self, x):
        """Piecewise-linear interpolation of the tabulated CDF."""
        return np.interp(x, self.x_grid, self.cdf_values, left=0.0, right=1.0)


@dataclass(frozen=True)
class DeterminantResult:
    log_det: float
    method: str
    achieved_error: float

    @property
    def value(self) -> float:
        return math.exp(self.log_det)


def _as_s(source: Union[SpectralMeasure, STransform]) -> STransform:
    return source if isinstance(source, STransform) else STransform.of(source)


# -- marginal and integrated exponents --------------------------------------

def marginal_exponent(source: Union[SpectralMeasure, STransform], t: float) -> float:
    """f(t) = -1/2 log S(-t) below the rank, 0 above it.

    ``source`` is the law of X*X or an S-transform, e.g. a product built with
    :func:`freelyap.transforms.s_product`.
    """
    if not 0 < t < 1:
        raise DomainError(f"t must lie in (0, 1), got {t}")
    s = _as_s(source)
    if t == s.rank:
        raise BoundaryError(f"f is undefined at t = rank = {t}")
    if t > s.rank:
        return 0.0
    return -0.5 * math.log(s(-t))


def _boundary_term(t: float) -> float:
    return float(xlogy(1 - t, 1 - t) + xlogy(t, t))


def _F_increment(mu: SpectralMeasure, t0: float, t1: float) -> float:
    """F(t1) - F(t0) for 0 <= t0 <= t1 <= r."""
    if t1 <= t0:
        return 0.0
    m1, m2 = moment(mu, 1), moment(mu, 2)

    def g(x):
        return math.log(-_psi_inverse_raw(mu, x, m1, m2))

    lo, hi = -t1, -t0
    mid = (lo + hi) / 2
    total = 0.0
    for a, b in ((lo, mid), (mid, hi)):
        val, _ = integrate.quad(g, a, b, epsabs=F_TOL, epsrel=F_TOL, limit=200)
        total += val
    return 0.5 * (-total + _boundary_term(t1) - _boundary_term(t0))


def integrated_exponent(mu: SpectralMeasure, t: float) -> float:
    """F(t), the log-volume growth rate of a free rank-t subspace."""
    if not 0 <= t <= 1:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    if t == 0:
        return 0.0
    try:
        val = _F_increment(mu, 0.0, min(t, mu.rank))
    except DomainError:
        val = math.nan
    if not math.isfinite(val):
        warnings.warn(f"integrated exponent diverges for {mu.label} at t={t}",
                      HypothesisWarning, stacklevel=2)
        return -math.inf
    return val


def _f_limit(mu: SpectralMeasure, t: float) -> float:
    r = mu.rank
    if t == 0:
        return 0.5 * math.log(moment(mu, 1))
    if t > r:
        return 0.0
    if t == r:
        # left limit at the rank edge
        s = s_at_rank_edge(mu)
        return -math.inf if math.isinf(s) else -0.5 * math.log(s)
    return marginal_exponent(mu, t)


def default_t_grid(rank: float = 1.0, n_interior: int = DEFAULT_T_POINTS) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n_interior + 2)
    if 0 < rank < 1:
        t = t[t != rank]
    return t


def lyapunov_profile(mu: SpectralMeasure, t_grid: Optional[Sequence[float]] = None) -> LyapunovProfile:
    """F and f sampled on ``t_grid`` (default: 0, 199 interior points, 1).

    F is accumulated from increments between consecutive grid points, each a
    short quadrature, so the whole profile costs about as much as one F(1).
    """
    r = mu.rank
    t = default_t_grid(r) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t) <= 0) or t[0] < 0 or t[-1] > 1:
        raise DomainError("t_grid must be increasing inside [0, 1]")
    if np.any((t == r) & (r < 1)):
        raise BoundaryError("t_grid must not contain t = rank")
    F = np.empty_like(t)
    acc, prev = 0.0, 0.0
    for i, ti in enumerate(t):
        acc += _F_increment(mu, min(prev, r), min(ti, r))
        prev = ti
        F[i] = acc
    f = np.array([_f_limit(mu, ti) for ti in t])
    return LyapunovProfile(t, F, f, r, mu.label)


# -- distribution of exponents ------------------------------------------------

def exponent_cdf(mu: SpectralMeasure) -> Callable:
    """Vectorised x -> |{t : f(t) <= x}| by monotone inversion of f.

    f is inverted through the parametrisation z -> (t, S) = (-psi(z), S(psi(z))),
    so each evaluation is a single bracketed root search in log(-z).
    """
    r = mu.rank
    f_top = 0.5 * math.log(moment(mu, 1))
    s_edge = s_at_rank_edge(mu)
    f_edge = -math.inf if math.isinf(s_edge) else -0.5 * math.log(s_edge)

    def t_star(x):
        if x >= f_top:
            return 0.0
        if x <= f_edge:
            return r
        target = -2.0 * x

        def h(v):
            return math.log(s_of_z(mu, -math.exp(v))) - target

        br = _expand_bracket(h, 0.0)
        if br is None:
            return r
        v = brentq(h, *br, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=300)
        return -_psi_raw(mu, -math.exp(v))

    def cdf(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([r - t_star(xi) + (1.0 - r) * (xi >= 0) for xi in x])
        return np.clip(out, 0.0, 1.0)

    return cdf


def default_x_grid(mu: SpectralMeasure, n: int = DEFAULT_X_POINTS) -> np.ndarray:
    r = mu.rank
    hi = 0.5 * math.log(moment(mu, 1))
    lo = _f_limit(mu, r)
    if not math.isfinite(lo):
        lo = marginal_exponent(mu, r * (1 - 1e-3))
    if r < 1:
        hi = max(hi, 0.0)
        lo = min(lo, 0.0)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.02 * (hi - lo)
    return np.linspace(lo - pad, hi + pad, n)


def exponent_distribution(mu: SpectralMeasure, x_grid: Optional[Sequence[float]] = None) -> ExponentDistribution:
    x = default_x_grid(mu) if x_grid is None else np.asarray(x_grid, dtype=float)
    return ExponentDistribution(x, exponent_cdf(mu)(x))


def largest_exponent(mu: SpectralMeasure) -> float:
    """1/2 log E(Y); with a kernel atom this is still sup f, flagged."""
    if mu.zero_mass > 0:
        warnings.warn("measure has an atom at 0; reporting sup of f over (0, r)",
                      HypothesisWarning, stacklevel=2)
    return 0.5 * math.log(moment(mu, 1))


# -- determinants ---------------------------------------------------------------

def fk_determinant(mu: SpectralMeasure, method: str = "definition") -> DeterminantResult:
    """Extended Fuglede-Kadison determinant of X from the law of X*X."""
    if method == "definition":
        val = log_integral(mu)
        coarse = log_integral(mu.with_order(max(mu.order // 2, 4)))
        err = 0.5 * abs(val - coarse) if math.isfinite(val) else 0.0
        return DeterminantResult(0.5 * val, method, err)
    if method == "s_integral":
        if mu.zero_mass > 0 or mu.support_min <= 0:
            raise PreconditionError("the S-integral needs X invertible (0 outside the support)")
        m1, m2 = moment(mu, 1), moment(mu, 2)
        val, err = integrate.quad(lambda t: math.log(_s_raw(mu, -t, m1, m2)), 0.0, 1.0,
                                  epsabs=F_TOL, epsrel=F_TOL, limit=200)
        return DeterminantResult(-0.5 * val, method, 0.5 * err)
    raise DomainError(f"unknown determinant method {method!r}")


def s_from_determinant(mu: SpectralMeasure, t: float, dt: float = 1e-4) -> float:
    """log S_Y(-t) recovered as -2 dF/dt by a central difference of F."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    if not dt < t < mu.rank - dt:
        raise DomainError(f"stencil [{t - dt}, {t + dt}] leaves (0, {mu.rank})")
    return -_F_increment(mu, t - dt, t + dt) / dt


# -- Newman's integral equation --------------------------------------------------

def newman_solve(mu: SpectralMeasure, x: float) -> float:
    """Solve int s / (H x^2 + (1 - H) s) dmu(s) = 1 for H in [0, 1].

    H(x) is the limiting CDF of exp(exponent) for large rotation-invariant
    random matrices.  Outside the range of exp(f) the answer is clamped to 0
    or 1.  Without a kernel atom H(x) equals the exponent distribution at
    log x; with one, kernel directions count at x = 0 (exponent -inf) rather
    than at exponent 0, so H exceeds it by 1 - r for x < 1.
    """
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    x_max = math.sqrt(moment(mu, 1))
    s_edge = s_at_rank_edge(mu)
    x_min = 0.0 if math.isinf(s_edge) else 1.0 / math.sqrt(s_edge)
    if x >= x_max:
        return 1.0
    if x <= x_min:
        return 0.0
    nodes, w = mu.quadrature()
    pos = nodes > 0
    s, w = nodes[pos], w[pos]
    x2 = x * x

    def phi(h):
        return float(np.dot(w, s / (h * x2 + (1.0 - h) * s))) - 1.0

    # phi < 0 left of the interior root and > 0 right of it
    lo, hi = 0.0, 1.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if phi(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def default_newman_grid(mu: SpectralMeasure, n: int = 50) -> np.ndarray:
    x_max = math.sqrt(moment(mu, 1))
    s_edge = s_at_rank_edge(mu)
    x_min = 0.0 if math.isinf(s_edge) else 1.0 / math.sqrt(s_edge)
    if x_max - x_min < 1e-12:
        return np.linspace(0.5 * x_max, 1.5 * x_max, n)
    lo = x_min if x_min > 0 else 0.02 * x_max
    pad = 0.02 * (x_max - lo)
    return np.linspace(max(lo - pad, 1e-6), x_max + pad, n)


def newman_table(mu: SpectralMeasure, x_grid: Optional[Sequence[float]] = None) -> np.ndarray:
    """Rows (x, H(x), F_dist(log x), |difference|)."""
    x = default_newman_grid(mu) if x_grid is None else np.asarray(x_grid, dtype=float)
    H = np.array([newman_solve(mu, xi) for xi in x])
    F = exponent_cdf(mu)(np.log(x))
    return np.column_stack([x, H, F, np.abs(H - F)])
