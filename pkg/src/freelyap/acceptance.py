"""Acceptance criteria shared by ``freelyap verify`` and the test suite.

Each criterion returns a :class:`CriterionResult`; wall time counts towards
pass/fail so a criterion that is numerically right but too slow fails.
"""

import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .lyapunov import (exponent_cdf, fk_determinant, integrated_exponent, marginal_exponent,
                       newman_solve, newman_table, s_from_determinant)
from .rmt_oracle import (EnsembleConfig, compress_spectrum, exponent_ks, lyapunov_spectrum_qr,
                         projected_growth, projected_rank, restricted_cdf, ks_distance)
from .spectral_measures import (MpParameters, atomic_measure, compressed_mp_measure,
                                moment, mp_measure)
from .transforms import STransform, s_product


@dataclass
class CriterionResult:
    ident: str
    title: str
    passed: bool
    detail: str
    runtime: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.ident:<5} {status}  {self.title}: {self.detail} "
                f"[{self.runtime:.2f}s / limit {self.limit:g}s]")


def mp_cdf_closed(lam: float, x) -> np.ndarray:
    """Closed-form exponent distribution of MP(lam), from f(t) = log(lam - t) / 2."""
    x = np.asarray(x, dtype=float)
    e = np.exp(2 * x)
    if lam >= 1:
        return np.clip(e + 1 - lam, 0.0, 1.0)
    return np.where(x >= 0, 1.0, np.minimum(e, lam))


def mp_logdet_closed(lam: float) -> float:
    """log det X for X*X ~ MP(lam), lam >= 1: (1/2) int_0^1 log(lam - t) dt."""
    return 0.5 * (lam * math.log(lam) - (lam - 1) * math.log(lam - 1) - 1) if lam > 1 \
        else -0.5


def _grid19(upper: float) -> np.ndarray:
    return upper * np.arange(1, 20) / 20


def ac1():
    errs = []
    for lam in (0.5, 1.0, 2.0, 5.0):
        mu = mp_measure(lam)
        for t in _grid19(min(1.0, lam)):
            errs.append(abs(marginal_exponent(mu, t) - 0.5 * math.log(lam - t)))
    m = max(errs)
    return m <= 1e-8, f"max |f - log(lam - t)/2| = {m:.2e} (tol 1e-8)"


def ac2():
    cases = [(2.0, np.linspace(-1.0, 1.0, 100)), (0.5, np.linspace(-2.0, 1.0, 100)),
             (1.0, np.linspace(-3.0, 0.5, 100))]
    errs = {}
    for lam, x in cases:
        errs[lam] = float(np.max(np.abs(exponent_cdf(mp_measure(lam))(x) - mp_cdf_closed(lam, x))))
    m = max(errs.values())
    # MP(1): closed form is the triangle law e^{2x} on x < 0
    tri = np.linspace(-3.0, -1e-3, 100)
    tri_err = float(np.max(np.abs(exponent_cdf(mp_measure(1.0))(tri) - np.exp(2 * tri))))
    m = max(m, tri_err)
    return m <= 1e-8, f"max CDF error over MP(2), MP(0.5), MP(1) = {m:.2e} (tol 1e-8)"


def ac3():
    rel = []
    for lam in (1.5, 2.0, 4.0):
        mu = mp_measure(lam)
        d1 = fk_determinant(mu, "definition").value
        d2 = fk_determinant(mu, "s_integral").value
        rel.append(abs(d1 - d2) / abs(d2))
        rel.append(abs(d1 - math.exp(mp_logdet_closed(lam))) / abs(d2))
    d_mp2 = fk_determinant(mp_measure(2.0)).value
    ok = max(rel) <= 1e-6 and abs(d_mp2 - 1.21306) < 1e-5
    return ok, f"max relative gap = {max(rel):.2e} (tol 1e-6), det MP(2) = {d_mp2:.6f}"


def ac4():
    mu = mp_measure(2.0)
    errs = [abs(s_from_determinant(mu, t, 1e-4) + math.log(2.0 - t)) for t in (0.25, 0.5, 0.75)]
    return max(errs) <= 1e-6, f"max |log S + log(2 - t)| = {max(errs):.2e} (tol 1e-6)"


def ac5():
    s = s_product(STransform.of(mp_measure(2.0)), STransform.of(mp_measure(3.0)))
    errs = [abs(marginal_exponent(s, t) - 0.5 * math.log(2 - t) - 0.5 * math.log(3 - t))
            for t in _grid19(1.0)]
    return max(errs) <= 1e-8, f"max additivity error = {max(errs):.2e} (tol 1e-8)"


def ac6():
    measures = [mp_measure(0.5), mp_measure(1.0), mp_measure(2.0), mp_measure(5.0),
                compressed_mp_measure(0.5, 2.0),
                atomic_measure({1.0: 0.3, 2.0: 0.4, 5.0: 0.3}, "3-atom")]
    worst_rise, worst_top = 0.0, 0.0
    for mu in measures:
        r = mu.rank
        t = r * np.arange(1, 200) / 200
        f = np.array([marginal_exponent(mu, ti) for ti in t])
        worst_rise = max(worst_rise, float(np.max(np.diff(f), initial=0.0)))
        if mu.zero_mass == 0:
            top = 0.5 * math.log(moment(mu, 1))
            worst_top = max(worst_top, abs(marginal_exponent(mu, 1e-6) - top))
    ok = worst_rise <= 1e-10 and worst_top <= 1e-6
    return ok, f"largest increase = {worst_rise:.1e} (tol 1e-10), |f(1e-6) - log(m1)/2| = {worst_top:.1e}"


def ac7():
    diffs = [float(np.max(newman_table(mp_measure(lam))[:, 3])) for lam in (1.0, 2.0)]
    mu = mp_measure(1.0)
    tri = max(abs(newman_solve(mu, x) - x * x) for x in np.linspace(0.05, 0.95, 50))
    ok = max(diffs) <= 1e-6 and tri <= 1e-6
    return ok, f"sup |H - CDF(log x)| = {max(diffs):.2e}, sup |H - x^2| = {tri:.2e} (tol 1e-6)"


def ac8(seed: int = 0):
    rows = []
    for lam, t in ((1.0, 0.25), (1.0, 0.5), (2.0, 0.25)):
        cfg = EnsembleConfig(N=256, steps_n=200, seed=seed, singular_law=MpParameters(lam))
        mc = projected_growth(cfg, t)
        rows.append((lam, t, mc, integrated_exponent(cfg.measure, t)))
    worst = max(abs(mc - an) for *_, mc, an in rows)
    txt = ", ".join(f"MP({lam:g}) t={t}: {mc:.4f} vs {an:.4f}" for lam, t, mc, an in rows)
    return worst <= 0.02, f"{txt}; max gap {worst:.4f} (tol 0.02)"


def ac9(seed: int = 0):
    cfg = EnsembleConfig(N=256, steps_n=2000, trials=4, seed=seed, singular_law=MpParameters(1.0))
    exps, _, _ = lyapunov_spectrum_qr(cfg)
    ks = exponent_ks(exps, cfg.measure)
    mid = exps[cfg.N // 2 - 1]
    ok = ks <= 0.08 and abs(mid - 0.5 * math.log(0.5)) <= 0.03
    return ok, f"KS = {ks:.4f} (tol 0.08), exponent k=N/2 = {mid:.4f} vs {0.5 * math.log(0.5):.4f} (tol 0.03)"


def ac10(seed: int = 0):
    cfg = EnsembleConfig(N=512, trials=8, seed=seed, singular_law=MpParameters(2.0))
    ev = compress_spectrum(cfg, 0.5)
    ks = ks_distance(ev, restricted_cdf(compressed_mp_measure(0.5, 2.0), 0.5))
    lo, hi = float(ev[0]), float(ev[-1])
    ok = ks <= 0.08 and abs(lo - 0.5) <= 0.1 and abs(hi - 4.5) <= 0.1
    return ok, f"KS = {ks:.4f} (tol 0.08), support [{lo:.3f}, {hi:.3f}] vs [0.5, 4.5] (tol 0.1)"


def ac11(seed: int = 0):
    cfg = EnsembleConfig(N=500, seed=seed, singular_law=MpParameters(0.4))
    rank = projected_rank(cfg, 0.3)
    return rank == 150, f"rank(X P_t) = {rank}, expected 150"


CRITERIA: Dict[str, tuple] = {
    "AC1": ("marginal exponent of MP(lam) vs closed form", ac1, 2.0, False),
    "AC2": ("exponent distributions of MP(2), MP(0.5), MP(1)", ac2, 2.0, False),
    "AC3": ("determinant by log-integral vs S-integral", ac3, 2.0, False),
    "AC4": ("S-transform recovered from determinant growth", ac4, 1.0, False),
    "AC5": ("additivity under free products", ac5, 2.0, False),
    "AC6": ("monotonicity and largest exponent", ac6, 1.0, False),
    "AC7": ("integral-equation distribution vs S-transform route", ac7, 2.0, False),
    "AC8": ("MC projected growth vs F(t)", ac8, 60.0, True),
    "AC9": ("MC triangle law", ac9, 300.0, True),
    "AC10": ("MC compression of MP(2) at t = 0.5", ac10, 60.0, True),
    "AC11": ("kernel rank of X P_t at finite N", ac11, 5.0, True),
}


def run_criterion(ident: str, seed: int = 0) -> CriterionResult:
    title, fn, limit, seeded = CRITERIA[ident]
    start = time.perf_counter()
    ok, detail = fn(seed) if seeded else fn()
    runtime = time.perf_counter() - start
    return CriterionResult(ident, title, bool(ok) and runtime < limit, detail, runtime, limit)


def run_all(ids: Optional[Sequence[str]] = None, seed: int = 0,
            echo: Optional[Callable[[str], None]] = None) -> List[CriterionResult]:
    out = []
    for ident in ids or list(CRITERIA):
        res = run_criterion(ident, seed)
        if echo:
            echo(res.line())
        out.append(res)
    return out
