"""Cauchy transform, psi-function, its inverse and the S-transform.

Everything is evaluated on the real axis only.  For z < 0 the psi-function
``psi(z) = int z x / (1 - z x) dmu`` increases from ``-r`` (z -> -inf) to 0,
where ``r = 1 - mu({0})``; its inverse on ``(-r, 0)`` is found by a bracketed
root search in ``v = log(-z)``.  Near ``w = -r`` the search works with the gap
``r + psi(z) = int_{x>0} dmu / (1 - z x)``, which is computed without
cancellation, so arguments very close to the boundary keep full relative
accuracy.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .spectral_measures import SpectralMeasure, moment

SERIES_CUTOFF = 1e-6
BOUNDARY_GUARD = 1e-9
_V_LIMIT = 700.0


@dataclass(frozen=True)
class TransformPoint:
    argument: float
    value: float
    kind: str
    achieved_error: float


@dataclass(frozen=True)
class RankInfo:
    r: float

    @classmethod
    def of(cls, mu: SpectralMeasure) -> "RankInfo":
        return cls(mu.rank)


# -- kernels on the quadrature rule ----------------------------------------

def _psi_raw(mu: SpectralMeasure, z: float) -> float:
    x, w = mu.quadrature()
    zx = z * x
    return float(np.dot(w, zx / (1.0 - zx)))


def _gap(mu: SpectralMeasure, z: float) -> float:
    """r + psi(z) for z < 0, summed over the mass off zero."""
    x, w = mu.quadrature()
    pos = x > 0
    return float(np.dot(w[pos], 1.0 / (1.0 - z * x[pos])))


def _one_plus_psi(mu: SpectralMeasure, z: float) -> float:
    x, w = mu.quadrature()
    return float(np.dot(w, 1.0 / (1.0 - z * x)))


def _expand_bracket(h, v0, step=2.0):
    lo = hi = v0
    hlo = hhi = h(v0)
    while hlo > 0:
        lo -= step
        step *= 2
        if lo < -_V_LIMIT:
            return None
        hlo = h(lo)
    step = 2.0
    while hhi < 0:
        hi += step
        step *= 2
        if hi > _V_LIMIT:
            return None
        hhi = h(hi)
    return lo, hi


def _psi_inverse_raw(mu: SpectralMeasure, w: float, m1=None, m2=None) -> float:
    """psi^{-1}(w) for w in (-r, 0) without the boundary guard."""
    if -w < SERIES_CUTOFF:
        m1 = moment(mu, 1) if m1 is None else m1
        m2 = moment(mu, 2) if m2 is None else m2
        return w / m1 - (m2 / m1 ** 3) * w * w
    r = mu.rank
    m1 = moment(mu, 1) if m1 is None else m1
    if w >= -r / 2:
        target = math.log(-w)

        def h(v):
            return math.log(-_psi_raw(mu, -math.exp(v))) - target
    else:
        target = math.log(r + w)

        def h(v):
            return target - math.log(_gap(mu, -math.exp(v)))
    br = _expand_bracket(h, math.log(-w / m1))
    if br is None:
        raise DomainError(f"psi^-1({w}) is out of numerical reach")
    v = brentq(h, *br, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=300)
    return -math.exp(v)


# -- public operations -------------------------------------------------------

def cauchy(mu: SpectralMeasure, z: float, total_mass: float = 1.0) -> float:
    """G(z) = total_mass * int dmu(x) / (z - x) off the support.

    ``total_mass`` rescales the probability measure ``mu`` so sub-probability
    measures (e.g. a compression with its kernel atom removed) can be handled.
    """
    if not (z < 0 or z > mu.support_max):
        raise DomainError(f"z = {z} lies in the closed convex hull of the support")
    x, w = mu.quadrature()
    return total_mass * float(np.dot(w, 1.0 / (z - x)))


def psi(mu: SpectralMeasure, z: float, total_mass: float = 1.0) -> float:
    """psi(z) = int z x / (1 - z x) dmu, valid for z < 0 or 0 <= z < 1/sup."""
    if z > 0 and z * mu.support_max >= 1:
        raise DomainError(f"psi({z}) needs z < 1/sup(support) = {1 / mu.support_max}")
    if z == 0:
        return 0.0
    return total_mass * _psi_raw(mu, z)


def psi_inverse(mu: SpectralMeasure, w: float) -> float:
    """The unique z < 0 with psi(z) = w, for w in (-r, 0)."""
    r = mu.rank
    if not -r < w < 0:
        raise DomainError(f"psi^-1 is defined on (-{r}, 0), got {w}")
    if w - (-r) < BOUNDARY_GUARD:
        raise DomainError(f"w = {w} is within {BOUNDARY_GUARD} of -r = {-r}")
    return _psi_inverse_raw(mu, w)


def s_transform(mu: SpectralMeasure, w: float) -> float:
    """S(w) = (1 + 1/w) psi^{-1}(w); S(0) = 1 / E(Y)."""
    r = mu.rank
    if w == 0:
        return 1.0 / moment(mu, 1)
    if not -r < w < 0:
        raise DomainError(f"S is defined on (-{r}, 0], got {w}")
    z = psi_inverse(mu, w)
    return (1.0 + w) / w * z


def _s_raw(mu: SpectralMeasure, w: float, m1=None, m2=None) -> float:
    if w == 0:
        return 1.0 / (moment(mu, 1) if m1 is None else m1)
    return (1.0 + w) / w * _psi_inverse_raw(mu, w, m1, m2)


def s_of_z(mu: SpectralMeasure, z: float) -> float:
    """S evaluated at w = psi(z), parametrised by z < 0."""
    return z * _one_plus_psi(mu, z) / _psi_raw(mu, z)


def s_at_rank_edge(mu: SpectralMeasure) -> float:
    """lim S(w) as w -> -r from the right (may be +inf)."""
    if mu.zero_mass > 0:
        return math.inf
    # r = 1: S(-1) = E(1/Y), finite iff no mass accumulates at 0
    for seg in mu.segments:
        if seg.a == 0.0 and seg.edge_exponent_left <= 0:
            return math.inf
    x, w = mu.quadrature()
    return float(np.dot(w, 1.0 / x))


def evaluate(mu: SpectralMeasure, kind: str, arg: float) -> TransformPoint:
    """Evaluate one transform and report an error estimate with it."""
    if kind == "cauchy":
        val = cauchy(mu, arg)
        err = abs(val - cauchy(mu.with_order(max(mu.order // 2, 4)), arg))
    elif kind == "psi":
        val = psi(mu, arg)
        err = abs(val - psi(mu.with_order(max(mu.order // 2, 4)), arg))
    elif kind == "psi_inverse":
        val = psi_inverse(mu, arg)
        err = abs(_psi_raw(mu, val) - arg)
    elif kind == "s_transform":
        val = s_transform(mu, arg)
        err = 0.0 if arg == 0 else abs(_psi_raw(mu, val * arg / (1 + arg)) - arg)
    else:
        raise DomainError(f"unknown transform kind {kind!r}")
    return TransformPoint(float(arg), float(val), kind, float(err))


class STransform:
    """Callable S-transform on (-rank, 0]; products model free multiplication.

    For free X and Y the S-transform of (XY)*(XY) is the pointwise product of
    those of X*X and Y*Y, on the smaller of the two ranks.
    """

    def __init__(self, func: Callable[[float], float], rank: float, label: str = ""):
        self._func = func
        self.rank = float(rank)
        self.label = label

    @classmethod
    def of(cls, mu: SpectralMeasure) -> "STransform":
        m1, m2 = moment(mu, 1), moment(mu, 2)
        return cls(lambda w: _s_raw(mu, w, m1, m2), mu.rank, mu.label)

    @classmethod
    def constant(cls, value: float = 1.0) -> "STransform":
        return cls(lambda w: value, 1.0, f"const({value:g})")

    def __call__(self, w: float) -> float:
        if not -self.rank < w <= 0:
            raise DomainError(f"S is defined on (-{self.rank}, 0], got {w}")
        return self._func(w)

    def __mul__(self, other: "STransform") -> "STransform":
        return s_product(self, other)


def s_product(s1: STransform, s2: STransform) -> STransform:
    """S-transform of the free multiplicative convolution of the two laws."""
    return STransform(lambda w: s1(w) * s2(w), min(s1.rank, s2.rank),
                      f"{s1.label}*{s2.label}")
