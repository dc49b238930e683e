import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from freelyap.lyapunov import exponent_cdf, integrated_exponent, marginal_exponent
from freelyap.spectral_measures import (ContinuousSegment, SpectralMeasure, atomic_measure,
                                        compressed_mp_measure, log_integral_partials, moment,
                                        mp_measure)
from freelyap.transforms import (STransform, cauchy, psi, psi_inverse, s_product, s_transform)

locations = st.floats(0.05, 20.0, allow_nan=False)


@st.composite
def atomic_measures(draw, allow_kernel=True):
    xs = draw(st.lists(locations, min_size=1, max_size=5, unique_by=lambda v: round(v, 3)))
    ws = draw(st.lists(st.floats(0.05, 1.0), min_size=len(xs), max_size=len(xs)))
    if allow_kernel and draw(st.booleans()):
        xs = xs + [0.0]
        ws = ws + [draw(st.floats(0.05, 0.6)) * sum(ws)]
    total = sum(ws)
    return atomic_measure(dict(zip(xs, [w / total for w in ws])))


@st.composite
def segment_measures(draw):
    """One segment with a random positive cubic smooth part, normalised."""
    a = draw(st.floats(0.0, 3.0))
    b = a + draw(st.floats(0.2, 5.0))
    c = draw(st.lists(st.floats(0.1, 2.0), min_size=4, max_size=4))
    al = draw(st.sampled_from([-0.5, 0.0, 0.5, 1.5])) if a == 0 else draw(st.sampled_from([0.0, 0.5, 1.5]))
    ar = draw(st.sampled_from([0.0, 0.5, 2.0]))

    def smooth(x):
        u = (np.asarray(x) - a) / (b - a)
        return c[0] + c[1] * u + c[2] * u ** 2 + c[3] * u ** 3

    raw = ContinuousSegment.from_function(a, b, smooth, al, ar)
    m = float(_rule(raw)[1].sum())
    seg = ContinuousSegment.from_function(a, b, lambda v: smooth(v) / m, al, ar)
    return SpectralMeasure((), (seg,), "poly")


def _rule(seg):
    from freelyap.spectral_measures import _segment_rule
    return _segment_rule(seg, 20)


any_measure = st.one_of(atomic_measures(), segment_measures(),
                        st.floats(0.1, 10.0).map(mp_measure),
                        st.tuples(st.floats(0.05, 1.0), st.floats(0.1, 5.0)).map(
                            lambda p: compressed_mp_measure(*p)))


@given(any_measure)
def test_total_mass(mu):
    assert abs(mu.quadrature()[1].sum() - 1) <= 1e-10


@given(any_measure)
def test_psi_increasing(mu):
    z = -np.logspace(3, -3, 20)
    vals = np.array([psi(mu, zi) for zi in z])
    assert np.all(np.diff(vals) > 0)
    assert np.all((vals > -mu.rank - 1e-12) & (vals < 0))


@given(any_measure)
def test_psi_round_trip(mu):
    r = mu.rank
    for w in np.linspace(-r + 1e-3, -1e-3, 15):
        assert abs(psi(mu, psi_inverse(mu, w)) - w) <= 1e-10


@given(any_measure, st.sampled_from([0.5, 1.0, 2.0, 5.0]))
def test_cauchy_psi_identity(mu, s):
    assert abs(cauchy(mu, -s) + psi(mu, -1 / s) / s + 1 / s) <= 1e-9


@given(any_measure)
def test_s_non_increasing(mu):
    r = mu.rank
    w = np.linspace(-r + 1e-3 * r, 0, 50)
    s = np.array([s_transform(mu, wi) for wi in w])
    assert np.all(np.diff(s) <= 1e-10 * np.abs(s[1:]))


@given(any_measure)
def test_marginal_exponent_profile(mu):
    r = mu.rank
    t = r * np.linspace(0.02, 0.98, 25)
    f = np.array([marginal_exponent(mu, ti) for ti in t])
    assert np.all(np.diff(f) <= 1e-10)
    assert f[0] <= 0.5 * math.log(moment(mu, 1)) + 1e-12


@given(any_measure)
def test_exponent_cdf_is_a_distribution(mu):
    top = 0.5 * math.log(moment(mu, 1))
    x = np.linspace(top - 4, max(top, 0.0) + 0.5, 40)
    F = exponent_cdf(mu)(x)
    assert np.all(np.diff(F) >= -1e-12)
    assert np.all((F >= 0) & (F <= 1))
    assert F[-1] == 1.0


@given(any_measure)
def test_log_integral_partials_decrease(mu):
    p = log_integral_partials(mu, [10.0 ** -k for k in range(0, 8)])
    assert np.all(np.diff(p) <= 1e-12)


@given(st.floats(0.1, 10.0), st.floats(0.01, 0.99))
def test_mp_closed_form(lam, u):
    mu = mp_measure(lam)
    t = u * min(1.0, lam)
    assert abs(marginal_exponent(mu, t) - 0.5 * math.log(lam - t)) <= 1e-9
    assert abs(moment(mu, 1) - lam) <= 1e-8 * lam
    assert abs(moment(mu, 2) - lam * lam - lam) <= 1e-7 * (lam * lam + lam)


@given(st.floats(0.05, 1.0), st.floats(0.1, 5.0))
def test_compressed_mp_mass_and_mean(t, lam):
    mu = compressed_mp_measure(t, lam)
    assert mu.zero_mass == pytest.approx(max(1 - lam, 1 - t), abs=1e-15)
    assert abs(moment(mu, 1) - lam * t) <= 1e-9 * max(1, lam)


@given(st.floats(0.5, 8.0), st.floats(0.5, 8.0), st.floats(0.01, 0.99))
def test_additivity(l1, l2, u):
    s = s_product(STransform.of(mp_measure(l1)), STransform.of(mp_measure(l2)))
    t = u * min(1.0, l1, l2)
    assume(t < s.rank)
    expected = 0.5 * math.log(l1 - t) + 0.5 * math.log(l2 - t)
    assert abs(marginal_exponent(s, t) - expected) <= 1e-8


@settings(max_examples=10)
@given(atomic_measures(allow_kernel=False), st.floats(0.1, 0.9))
def test_integrated_is_integral_of_marginal(mu, t):
    from scipy import integrate
    ref, _ = integrate.quad(lambda s: marginal_exponent(mu, s), 0, t, epsabs=1e-11, limit=200)
    assert abs(integrated_exponent(mu, t) - ref) <= 1e-6


@given(st.floats(0.1, 10.0))
def test_scalar_law(c2):
    mu = atomic_measure({c2: 1.0})
    assert abs(marginal_exponent(mu, 0.5) - 0.5 * math.log(c2)) <= 1e-12
