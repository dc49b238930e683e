"""Spectral probability measures of positive operators.

A measure is a finite list of atoms plus continuous segments.  On a segment
``[a, b]`` the density is stored as

    density(x) = (x - a)**alpha_l * (b - x)**alpha_r * smooth(x)

where ``smooth`` is sampled at the interior Chebyshev nodes
``x = a + (b - a)(1 + cos theta)/2``.  Square-root edges (alpha = 1/2) are the
Marchenko-Pastur case; a left edge at 0 carrying a 1/x factor uses
alpha_l = -1/2.

Every measure carries a fixed composite quadrature rule (nodes and weights,
atoms included) so that integrals against the measure are dot products.  The
rule is Gauss-Jacobi on the two end panels and Gauss-Legendre on panels that
are geometrically graded towards both edges, which keeps near-singular
integrands such as 1/(1 - z x) with z -> -inf or log x near x = 0 accurate.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator
from scipy.special import roots_jacobi, roots_legendre

from .errors import DomainError

DEFAULT_NODES = 257
DEFAULT_ORDER = 20
MASS_TOL = 1e-10
QUAD_TOL = 1e-10

# log^{+c} cutoffs, decreasing to 0
DEFAULT_CUTOFFS = tuple(10.0 ** -k for k in range(1, 17))
DIVERGENCE_DROP = 1.0

_MAX_GRADING = 100
_RIGHT_GRADING = 12
_CDF_PANELS = 4096


def chebyshev_nodes(a: float, b: float, n: int) -> np.ndarray:
    """Interior first-kind Chebyshev nodes on ``[a, b]`` in increasing order."""
    theta = (2 * np.arange(n) + 1) * np.pi / (2 * n)
    u = np.cos(theta)[::-1]
    return a + (b - a) * (1 + u) / 2


def _barycentric(values: np.ndarray, a: float, b: float, x) -> np.ndarray:
    n = len(values)
    theta = (2 * np.arange(n) + 1) * np.pi / (2 * n)
    nodes = np.cos(theta)[::-1]
    wts = ((-1.0) ** np.arange(n) * np.sin(theta))[::-1]
    u = (2 * np.atleast_1d(np.asarray(x, dtype=float)) - a - b) / (b - a)
    diff = u[:, None] - nodes[None, :]
    hit = diff == 0.0
    diff[hit] = 1.0
    c = wts / diff
    out = (c @ values) / c.sum(axis=1)
    rows, cols = np.nonzero(hit)
    out[rows] = values[cols]
    return out


@dataclass(frozen=True, eq=False)
class ContinuousSegment:
    """Continuous part of a measure on ``[a, b]`` with power-law edges."""

    a: float
    b: float
    values: np.ndarray
    edge_exponent_left: float = 0.5
    edge_exponent_right: float = 0.5
    smooth_fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "values", values)
        if not self.a < self.b:
            raise DomainError(f"segment needs a < b, got [{self.a}, {self.b}]")
        if self.a < 0:
            raise DomainError("segments must lie in [0, inf)")
        if min(self.edge_exponent_left, self.edge_exponent_right) <= -1:
            raise DomainError("edge exponents must exceed -1")
        if values.ndim != 1 or len(values) < 2:
            raise DomainError("need at least two smooth-part samples")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DomainError("smooth-part samples must be finite and >= 0")

    @classmethod
    def from_function(cls, a, b, smooth_fn, alpha_l=0.5, alpha_r=0.5,
                      n_nodes=DEFAULT_NODES):
        values = smooth_fn(chebyshev_nodes(a, b, n_nodes))
        return cls(a, b, values, alpha_l, alpha_r, smooth_fn)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def nodes(self) -> np.ndarray:
        return chebyshev_nodes(self.a, self.b, len(self.values))

    def smooth(self, x) -> np.ndarray:
        if self.smooth_fn is not None:
            return np.asarray(self.smooth_fn(np.asarray(x, dtype=float)), dtype=float)
        return _barycentric(self.values, self.a, self.b, x)

    def density(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        inside = (x > self.a) & (x < self.b)
        xi = x[inside]
        out[inside] = ((xi - self.a) ** self.edge_exponent_left
                       * (self.b - xi) ** self.edge_exponent_right
                       * self.smooth(xi))
        return out


def _grading_depth(a: float, length: float) -> int:
    # grade until the end panel is tiny compared with the distance to x = 0
    if a <= 1e3 * length * 2.0 ** -_MAX_GRADING:
        return _MAX_GRADING
    k = math.ceil(math.log2(length / (1e-3 * a)))
    return int(min(max(k, 2), _MAX_GRADING))


def _edge_panels(length, depth, alpha_near, alpha_far, order):
    """Offsets from one edge and weights of (d**alpha_near)(L-d)**alpha_far dd."""
    gl_u, gl_w = roots_legendre(order)
    offs, wts = [], []
    eps = length * 2.0 ** -(depth + 1)
    u, w = roots_jacobi(order, 0.0, alpha_near)
    d = eps * (1 + u) / 2
    offs.append(d)
    wts.append(w * (eps / 2) ** (alpha_near + 1) * (length - d) ** alpha_far)
    for k in range(depth, 1, -1):
        lo, hi = length * 2.0 ** -(k + 1), length * 2.0 ** -k
        d = lo + (hi - lo) * (1 + gl_u) / 2
        offs.append(d)
        wts.append(gl_w * (hi - lo) / 2 * d ** alpha_near * (length - d) ** alpha_far)
    return np.concatenate(offs), np.concatenate(wts)


def _segment_rule(seg: ContinuousSegment, order: int):
    """Quadrature nodes and weights (density included) for one segment."""
    a, b, L = seg.a, seg.b, seg.length
    al, ar = seg.edge_exponent_left, seg.edge_exponent_right
    dl, wl = _edge_panels(L, _grading_depth(a, L), al, ar, order)
    dr, wr = _edge_panels(L, _RIGHT_GRADING, ar, al, order)
    gl_u, gl_w = roots_legendre(order)
    dm = L / 4 + (L / 2) * (1 + gl_u) / 2
    wm = gl_w * (L / 4) * dm ** al * (L - dm) ** ar
    x = np.concatenate([a + dl, a + dm, b - dr[::-1]])
    w = np.concatenate([wl, wm, wr[::-1]])
    return x, w * seg.smooth(x)


def _pieces_sorted(atoms, segments):
    pieces = [(x, "atom", m) for x, m in atoms] + [(s.a, "seg", s) for s in segments]
    return sorted(pieces, key=lambda p: (p[0], p[1] == "seg"))


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Probability measure on [0, inf): atoms plus continuous segments."""

    atoms: tuple = ()
    segments: tuple = ()
    label: str = ""
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        atoms = tuple(sorted((float(x), float(m)) for x, m in self.atoms))
        segments = tuple(sorted(self.segments, key=lambda s: s.a))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "segments", segments)
        self._validate_layout()

        xs, ws = [], []
        for seg in segments:
            x, w = _segment_rule(seg, self.order)
            xs.append(x)
            ws.append(w)
        if atoms:
            xs.append(np.array([x for x, _ in atoms]))
            ws.append(np.array([m for _, m in atoms]))
        bounds = np.cumsum([0] + [len(v) for v in xs])
        slices = tuple(slice(int(i), int(j)) for i, j in zip(bounds, bounds[1:]))
        object.__setattr__(self, "_seg_slices", slices[:len(segments)])
        x = np.concatenate(xs) if xs else np.zeros(0)
        w = np.concatenate(ws) if ws else np.zeros(0)
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "_x", x)
        object.__setattr__(self, "_w", w)

        total = float(w.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise DomainError(f"total mass {total!r} differs from 1 by more than {MASS_TOL}")
        for seg, xw in zip(segments, ws):
            if not xw.sum() > 0:
                raise DomainError("segment integral must be positive")

    def _validate_layout(self):
        locs = [x for x, _ in self.atoms]
        if len(set(locs)) != len(locs):
            raise DomainError("atom locations must be distinct")
        for x, m in self.atoms:
            if x < 0 or not math.isfinite(x):
                raise DomainError(f"atom location {x} outside [0, inf)")
            if not 0 < m <= 1:
                raise DomainError(f"atom mass {m} outside (0, 1]")
        for s, nxt in zip(self.segments, self.segments[1:]):
            if nxt.a < s.b:
                raise DomainError("segments overlap")
        for x, _ in self.atoms:
            for s in self.segments:
                if s.a < x < s.b:
                    raise DomainError(f"atom at {x} inside segment [{s.a}, {s.b}]")
                # a kernel atom may share the left edge 0 with a segment
                if (x == s.a and x != 0.0) or x == s.b:
                    raise DomainError(f"atom at {x} on a segment endpoint")

    # -- basic quantities -------------------------------------------------

    def quadrature(self):
        """Nodes and weights such that int g dmu ~= sum(w * g(x))."""
        return self._x, self._w

    def integrate(self, g) -> float:
        return float(np.dot(self._w, g(self._x)))

    @property
    def zero_mass(self) -> float:
        return sum(m for x, m in self.atoms if x == 0.0)

    @property
    def rank(self) -> float:
        """Mass off zero, r = 1 - mu({0})."""
        return 1.0 - self.zero_mass

    @property
    def support_max(self) -> float:
        ends = [x for x, _ in self.atoms] + [s.b for s in self.segments]
        return max(ends)

    @property
    def support_min(self) -> float:
        ends = [x for x, _ in self.atoms] + [s.a for s in self.segments]
        return min(ends)

    def with_order(self, order: int) -> "SpectralMeasure":
        return SpectralMeasure(self.atoms, self.segments, self.label, order)

    def density(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for seg in self.segments:
            out += seg.density(x)
        return out

    # -- distribution function ---------------------------------------------

    def _segment_tables(self):
        return [_SegmentCdf(seg) for seg in self.segments]

    def cdf(self, x) -> np.ndarray:
        """mu([0, x]) evaluated with a quadrature table per segment."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for loc, m in self.atoms:
            out += m * (x >= loc)
        for tab in self._segment_tables():
            out += tab(x)
        out[x >= self.support_max] = 1.0
        return np.clip(out, 0.0, 1.0)

    def quantile(self, p) -> np.ndarray:
        """Generalised inverse inf{x : mu([0, x]) >= p}."""
        p = np.atleast_1d(np.asarray(p, dtype=float))
        out = np.full_like(p, self.support_max)
        done = np.zeros(p.shape, dtype=bool)
        tables = {id(s): _SegmentCdf(s) for s in self.segments}
        acc = 0.0
        for loc, kind, obj in _pieces_sorted(self.atoms, self.segments):
            mass = obj if kind == "atom" else tables[id(obj)].mass
            sel = ~done & (p <= acc + mass)
            if kind == "atom":
                out[sel] = loc
            else:
                out[sel] = tables[id(obj)].inverse(np.clip(p[sel] - acc, 0.0, mass))
            done |= sel
            acc += mass
        return out


class _SegmentCdf:
    """Cumulative mass of one segment tabulated on a uniform theta grid."""

    def __init__(self, seg: ContinuousSegment, panels: int = _CDF_PANELS):
        self.seg = seg
        L = seg.length
        theta = np.linspace(0.0, np.pi, panels + 1)
        dl = L * np.sin(theta / 2) ** 2
        gl_u, gl_w = roots_legendre(10)
        lo, hi = theta[1:-2], theta[2:-1]
        th = (lo[:, None] + hi[:, None]) / 2 + (hi - lo)[:, None] / 2 * gl_u[None, :]
        jac = (L / 2) * np.sin(th)
        f = seg.density(seg.a + L * np.sin(th / 2) ** 2) * jac
        inner = (f * gl_w[None, :]).sum(axis=1) * (hi - lo) / 2
        first = _partial_mass(seg, 0.0, dl[1])
        last = _partial_mass(seg, dl[-2], L)
        inc = np.concatenate([[first], inner, [last]])
        self.theta = theta
        self.table = np.concatenate([[0.0], np.cumsum(inc)])
        self.mass = float(self.table[-1])
        self._fwd = PchipInterpolator(theta, self.table)
        keep = np.concatenate([[True], np.diff(self.table) > 0])
        self._inv = PchipInterpolator(self.table[keep], theta[keep])

    def __call__(self, x):
        seg = self.seg
        out = np.where(x >= seg.b, self.mass, 0.0)
        inside = (x > seg.a) & (x < seg.b)
        rel = np.clip((x[inside] - seg.a) / seg.length, 0.0, 1.0)
        out[inside] = self._fwd(2 * np.arcsin(np.sqrt(rel)))
        return out

    def inverse(self, q):
        th = self._inv(np.clip(q, 0.0, self.mass))
        return self.seg.a + self.seg.length * np.sin(th / 2) ** 2


def _partial_mass(seg: ContinuousSegment, d0: float, d1: float) -> float:
    """Mass of the segment between offsets d0 < d1 from its left edge."""
    a, L = seg.a, seg.length
    al, ar = seg.edge_exponent_left, seg.edge_exponent_right
    wl = al if d0 == 0.0 else 0.0
    wr = ar if d1 == L else 0.0

    def f(d):
        x = a + d
        fac = 1.0
        if wl == 0.0:
            fac *= d ** al
        if wr == 0.0:
            fac *= (L - d) ** ar
        return fac * float(seg.smooth(np.array([x]))[0])

    val, _ = integrate.quad(f, d0, d1, weight="alg", wvar=(wl, wr),
                            epsabs=1e-14, epsrel=1e-12, limit=200)
    return val


# -- constructors -----------------------------------------------------------

def point_mass(x: float = 1.0, label: Optional[str] = None) -> SpectralMeasure:
    return SpectralMeasure(((x, 1.0),), (), label or f"delta_{x:g}")


def atomic_measure(atoms, label: str = "atomic") -> SpectralMeasure:
    """Purely atomic measure from a mapping or sequence of (location, mass)."""
    items = atoms.items() if hasattr(atoms, "items") else atoms
    return SpectralMeasure(tuple(items), (), label)


def _mp_family(t: float, lam: float, label: str, n_nodes: int, order: int):
    a = (math.sqrt(t) - math.sqrt(lam)) ** 2
    b = (math.sqrt(t) + math.sqrt(lam)) ** 2
    if a == 0.0:
        # sqrt(x (b - x)) / x = x**-1/2 (b - x)**1/2
        seg = ContinuousSegment.from_function(
            a, b, lambda x: np.full_like(np.asarray(x, dtype=float), 1 / (2 * np.pi)),
            -0.5, 0.5, n_nodes)
    else:
        seg = ContinuousSegment.from_function(
            a, b, lambda x: 1.0 / (2 * np.pi * np.asarray(x, dtype=float)),
            0.5, 0.5, n_nodes)
    kernel = max(1.0 - lam, 1.0 - t)
    atoms = ((0.0, kernel),) if kernel > 0 else ()
    return SpectralMeasure(atoms, (seg,), label, order)


@dataclass(frozen=True)
class MpParameters:
    """Marchenko-Pastur rate and optional compression dimension."""

    lam: float
    t: Optional[float] = None

    def __post_init__(self):
        if not self.lam > 0 or not math.isfinite(self.lam):
            raise DomainError(f"Marchenko-Pastur rate must be positive, got {self.lam}")
        if self.t is not None and not 0 < self.t <= 1:
            raise DomainError(f"compression dimension must lie in (0, 1], got {self.t}")

    def measure(self, n_nodes: int = DEFAULT_NODES, order: int = DEFAULT_ORDER) -> "SpectralMeasure":
        if self.t is None:
            return mp_measure(self.lam, n_nodes, order)
        return compressed_mp_measure(self.t, self.lam, n_nodes, order)


def mp_measure(lam: float, n_nodes: int = DEFAULT_NODES,
               order: int = DEFAULT_ORDER) -> SpectralMeasure:
    """Marchenko-Pastur (free Poisson) law with rate ``lam``."""
    if not lam > 0 or not math.isfinite(lam):
        raise DomainError(f"Marchenko-Pastur rate must be positive, got {lam}")
    return _mp_family(1.0, lam, f"MP({lam:g})", n_nodes, order)


def compressed_mp_measure(t: float, lam: float, n_nodes: int = DEFAULT_NODES,
                          order: int = DEFAULT_ORDER) -> SpectralMeasure:
    """Law of P_t Y P_t for Y ~ MP(lam) and a free projection of trace t.

    Continuous part has density sqrt(4 lam t - (x - t - lam)^2) / (2 pi x) on
    [(sqrt t - sqrt lam)^2, (sqrt t + sqrt lam)^2]; the kernel atom has mass
    max(1 - lam, 1 - t).
    """
    if not 0 < t <= 1:
        raise DomainError(f"compression dimension must lie in (0, 1], got {t}")
    if not lam > 0 or not math.isfinite(lam):
        raise DomainError(f"Marchenko-Pastur rate must be positive, got {lam}")
    return _mp_family(float(t), float(lam), f"MP({lam:g})|P_{t:g}", n_nodes, order)


# -- integrals --------------------------------------------------------------

def moment(mu: SpectralMeasure, k: int) -> float:
    if k < 0:
        raise DomainError("moment order must be >= 0")
    if k == 0:
        return 1.0
    x, w = mu.quadrature()
    return float(np.dot(w, x ** k))


def log_integral_partials(mu: SpectralMeasure, cutoffs: Sequence[float]) -> np.ndarray:
    """int log^{+c}(x) dmu(x) for each cutoff c."""
    out = []
    x, w = mu.quadrature()
    seg_full = [float(np.dot(w[sl], np.log(x[sl]))) for sl in mu._seg_slices]
    for c in cutoffs:
        val = sum(m * math.log(loc) for loc, m in mu.atoms if loc > c)
        for seg, full in zip(mu.segments, seg_full):
            if c <= seg.a:
                val += full
            elif c < seg.b:
                val += _log_tail(seg, c)
        out.append(val)
    return np.array(out)


def _log_tail(seg: ContinuousSegment, c: float) -> float:
    al = seg.edge_exponent_left

    def f(x):
        return math.log(x) * (x - seg.a) ** al * float(seg.smooth(np.array([x]))[0])

    val, _ = integrate.quad(f, c, seg.b, weight="alg",
                            wvar=(0.0, seg.edge_exponent_right),
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def log_integral(mu: SpectralMeasure, cutoffs: Sequence[float] = DEFAULT_CUTOFFS) -> float:
    """lim_{c -> 0} int log^{+c}(x) dmu(x); ``-inf`` when it diverges.

    The partial values along ``cutoffs`` only drive the divergence test; the
    returned limit integrates log x over the mass off zero with the measure's
    quadrature rule.
    """
    cutoffs = np.asarray(cutoffs, dtype=float)
    if np.any(cutoffs <= 0) or np.any(np.diff(cutoffs) >= 0):
        raise DomainError("cutoffs must be positive and strictly decreasing")
    partials = log_integral_partials(mu, cutoffs)
    drops = -np.diff(partials)
    for i in range(len(drops) - 1):
        if drops[i] > DIVERGENCE_DROP and drops[i + 1] > DIVERGENCE_DROP:
            return -math.inf
    x, w = mu.quadrature()
    pos = x > 0
    val = float(np.dot(w[pos], np.log(x[pos])))
    return val if math.isfinite(val) else -math.inf
