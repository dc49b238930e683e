import json
import math

import numpy as np
import pytest

from freelyap.errors import DomainError
from freelyap.spectral_measures import (ContinuousSegment, MpParameters, SpectralMeasure,
                                        atomic_measure, chebyshev_nodes, compressed_mp_measure,
                                        log_integral, log_integral_partials, moment, mp_measure,
                                        point_mass)

from oracles import mp_integral


@pytest.mark.parametrize("lam", [0.1, 0.5, 1.0, 2.0, 5.0, 25.0])
def test_mp_mass_and_moments(lam):
    mu = mp_measure(lam)
    assert abs(mu.quadrature()[1].sum() - 1) < 1e-12
    assert abs(moment(mu, 1) - lam) < 1e-10
    assert abs(moment(mu, 2) - (lam * lam + lam)) < 1e-9
    # third free Poisson moment: lam^3 + 3 lam^2 + lam
    assert abs(moment(mu, 3) - (lam ** 3 + 3 * lam ** 2 + lam)) < 1e-8 * max(1, lam ** 3)


def test_mp_moments_match_independent_quad():
    for lam in (0.5, 2.0, 5.0):
        mu = mp_measure(lam)
        for g in (np.sqrt, lambda x: 1 / (1 + x), lambda x: np.exp(-x)):
            ref = mp_integral(lam, lambda x: float(g(np.array(x))))
            assert abs(mu.integrate(g) - ref) < 1e-10


def test_mp_layout():
    mu = mp_measure(2.0)
    (seg,) = mu.segments
    assert seg.a == pytest.approx(0.17157287525381, abs=1e-12)
    assert seg.b == pytest.approx(5.82842712474619, abs=1e-12)
    assert mu.atoms == ()
    mu = mp_measure(0.5)
    assert mu.atoms == ((0.0, 0.5),)
    assert mu.rank == pytest.approx(0.5)
    mu = mp_measure(1.0)
    assert mu.segments[0].a == 0.0
    assert mu.segments[0].edge_exponent_left == -0.5
    assert mu.atoms == ()


@pytest.mark.parametrize("lam", [0.0, -1.0, math.inf, math.nan])
def test_mp_rejects_bad_rate(lam):
    with pytest.raises(DomainError):
        mp_measure(lam)


def test_compressed_layout():
    mu = compressed_mp_measure(0.5, 2.0)
    (seg,) = mu.segments
    assert (seg.a, seg.b) == (pytest.approx(0.5), pytest.approx(4.5))
    assert mu.atoms == ((0.0, 0.5),)
    # kernel mass is max(1 - lam, 1 - t)
    assert compressed_mp_measure(0.3, 0.4).zero_mass == pytest.approx(0.7)
    assert compressed_mp_measure(0.4, 0.4).segments[0].a == 0.0


def test_compressed_at_one_matches_mp():
    for lam in (0.5, 1.0, 2.0):
        a, b = compressed_mp_measure(1.0, lam), mp_measure(lam)
        assert a.atoms == b.atoms
        sa, sb = a.segments[0], b.segments[0]
        assert abs(sa.a - sb.a) < 1e-12 and abs(sa.b - sb.b) < 1e-12
        x = np.linspace(sa.a, sa.b, 52)[1:-1]
        assert np.max(np.abs(a.density(x) - b.density(x))) < 1e-9


def test_compressed_cdf_against_quad():
    # frozen from quad of sqrt(4 lam t - (x - t - lam)^2) / (2 pi x), t=0.5, lam=2
    mu = compressed_mp_measure(0.5, 2.0)
    ref = {1.0: 0.09318920412108939, 2.0: 0.27669504063764316, 3.0: 0.40438643598229307}
    for x, v in ref.items():
        assert abs(mu.cdf(x)[0] - 0.5 - v) < 1e-8


def test_cdf_values():
    # MP(2) cdf(1) = 1/pi and MP(1) cdf(2) = 1/2 + 1/pi (quad oracle)
    assert abs(mp_measure(2.0).cdf(1.0)[0] - 1 / math.pi) < 1e-8
    assert abs(mp_measure(1.0).cdf(2.0)[0] - (0.5 + 1 / math.pi)) < 1e-8
    assert abs(mp_measure(1.0).cdf(0.5)[0] - 0.44059565583646165) < 1e-8
    mu = mp_measure(0.5)
    assert mu.cdf(0.0)[0] == pytest.approx(0.5)
    assert mu.cdf(-1.0)[0] == 0.0
    assert mu.cdf(100.0)[0] == 1.0


def test_quantile_inverts_cdf():
    for mu in (mp_measure(1.0), mp_measure(2.0), compressed_mp_measure(0.5, 2.0)):
        p = np.linspace(0.01, 0.99, 37)
        q = mu.quantile(p)
        ok = p > mu.zero_mass
        assert np.max(np.abs(mu.cdf(q[ok]) - p[ok])) < 1e-8
        assert np.all(q[~ok] == 0.0)
        assert np.all(np.diff(q) >= 0)


def test_point_and_atomic():
    d = point_mass(2.0)
    assert moment(d, 1) == 2.0 and moment(d, 0) == 1.0
    mu = atomic_measure({1.0: 0.3, 2.0: 0.4, 5.0: 0.3})
    assert moment(mu, 1) == pytest.approx(2.6)
    assert mu.quantile([0.1, 0.5, 0.95]).tolist() == [1.0, 2.0, 5.0]
    with pytest.raises(DomainError):
        atomic_measure({1.0: 0.5, 2.0: 0.4})
    with pytest.raises(DomainError):
        atomic_measure({-1.0: 1.0})


def test_layout_validation():
    seg = ContinuousSegment.from_function(1.0, 2.0, lambda x: np.full_like(x, 1 / (math.pi / 8)))
    # semicircle-shaped density of mass 1 on [1, 2]
    SpectralMeasure((), (seg,))
    with pytest.raises(DomainError):
        SpectralMeasure(((1.5, 0.1),), (seg,))
    with pytest.raises(DomainError):
        SpectralMeasure(((2.0, 0.1),), (seg,))
    with pytest.raises(DomainError):
        SpectralMeasure(((0.0, 0.5),), (seg,))   # total mass 1.5
    with pytest.raises(DomainError):
        ContinuousSegment(2.0, 1.0, [1.0, 1.0])
    with pytest.raises(DomainError):
        ContinuousSegment(0.0, 1.0, [1.0, 1.0], -1.0, 0.5)
    with pytest.raises(DomainError):
        ContinuousSegment(0.0, 1.0, [1.0, -1.0])


def test_chebyshev_nodes_increasing_and_interior():
    x = chebyshev_nodes(0.0, 1.0, 257)
    assert np.all(np.diff(x) > 0)
    assert x[0] > 0 and x[-1] < 1


def test_interpolated_smooth_part():
    # dropping the exact smooth function leaves barycentric interpolation
    mu = mp_measure(2.0)
    seg = mu.segments[0]
    bare = SpectralMeasure((), (ContinuousSegment(seg.a, seg.b, seg.values, 0.5, 0.5),))
    for k in (1, 2, 3):
        assert abs(moment(bare, k) - moment(mu, k)) < 1e-12 * moment(mu, k)


def test_order_refinement_is_stable():
    for lam in (0.5, 1.0, 2.0):
        mu = mp_measure(lam)
        fine = mu.with_order(40)
        for g in (np.log1p, np.sqrt):
            assert abs(mu.integrate(g) - fine.integrate(g)) < 1e-13


def _mp_elog(lam):
    # int log x dMP(lam) = lam log lam - (lam - 1) log(lam - 1) - 1 for lam >= 1
    return lam * math.log(lam) - (lam - 1) * math.log(lam - 1) - 1 if lam > 1 else -1.0


@pytest.mark.parametrize("lam", [1.0, 1.5, 2.0, 4.0, 10.0])
def test_log_integral(lam):
    assert abs(log_integral(mp_measure(lam)) - _mp_elog(lam)) < 1e-12


def test_log_integral_closed_form_against_quad():
    for lam in (1.5, 2.0, 4.0):
        assert abs(mp_integral(lam, math.log) - _mp_elog(lam)) < 1e-9
    assert _mp_elog(2.0) == pytest.approx(2 * math.log(2) - 1, abs=1e-15)


def test_log_integral_with_kernel_atom():
    # atom at 0 is excluded: int_{x>0} log x dMP(0.5)
    ref = mp_integral(0.5, lambda x: math.log(x) if x > 0 else 0.0)
    assert abs(log_integral(mp_measure(0.5)) - ref) < 1e-10
    assert log_integral(point_mass(0.0)) == 0.0


def test_log_integral_partials_monotone():
    for mu in (mp_measure(1.0), mp_measure(0.5), mp_measure(2.0)):
        p = log_integral_partials(mu, [10.0 ** -k for k in range(0, 12)])
        assert np.all(np.diff(p) <= 1e-12)
        assert abs(p[-1] - log_integral(mu)) < 1e-4


def test_log_integral_rejects_bad_cutoffs():
    with pytest.raises(DomainError):
        log_integral(mp_measure(1.0), [0.1, 0.2])
    with pytest.raises(DomainError):
        log_integral(mp_measure(1.0), [0.1, 0.0])


def test_mp_parameters():
    assert MpParameters(2.0).measure().label == "MP(2)"
    assert MpParameters(2.0, 0.5).measure().zero_mass == pytest.approx(0.5)
    with pytest.raises(DomainError):
        MpParameters(1.0, 1.5)
