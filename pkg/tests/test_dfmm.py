import math

import numpy as np
import pytest

from gumbel_waves.dfmm import (
    ConcavityError,
    DfmmConfig,
    h_derivatives,
    log_family_size,
    saddle,
    wave_profile,
)
from gumbel_waves.tails import SlowlyVarying, TypeI, gaussian_cdf, wave_location


def _cfg(alpha=1.0, n=1, sv=(), beta=0.1, x0=8, t=10**4):
    return DfmmConfig(TypeI(n, alpha, SlowlyVarying(tuple(sv))), beta=beta, x0=x0, t=t)


# ---------------------------------------------------------------- family size


def test_family_size_at_birth_is_one():
    cfg = _cfg(t=100)
    assert log_family_size(100, 100, cfg) == 0.0


def test_family_size_direct_value():
    # two generations of growth at rate (1-beta) * scale(10)
    cfg = _cfg(alpha=1.0, beta=0.5, x0=8, t=12)
    expect = 2.0 * math.log(0.5 * 10.0 * math.log(10.0))
    assert log_family_size(10, 12, cfg) == pytest.approx(expect, rel=1e-14)


def test_family_size_domain_check():
    cfg = _cfg(t=50)
    with pytest.raises(ValueError):
        log_family_size(4, 50, cfg)
    with pytest.raises(ValueError):
        log_family_size(60, 50, cfg)


def test_discrete_concavity_of_exponent():
    cfg = _cfg(alpha=2.0, t=2000)
    h = [log_family_size(k, cfg.t, cfg) for k in range(cfg.x0, cfg.t + 1)]
    d2 = np.diff(h, 2)
    assert np.all(d2 < 0.0)


# ---------------------------------------------------------------- derivatives


def _richardson(fd, eps):
    return (4.0 * fd(eps / 2.0) - fd(eps)) / 3.0


@pytest.mark.parametrize(
    "cfg,x",
    [
        (_cfg(alpha=1.0, t=1000), 100.0),
        (_cfg(alpha=2.0, t=1000), 200.0),
        (_cfg(alpha=1.5, n=2, sv=((1, 0.5),), beta=0.2, x0=20, t=2000), 300.0),
        (_cfg(alpha=0.8, sv=((1, -0.2),), x0=12, t=5000), 400.0),
    ],
)
def test_derivatives_match_finite_differences(cfg, x):
    t = float(cfg.t)

    def h(xx):
        return h_derivatives(xx, t, cfg)[0]

    d1 = _richardson(lambda e: (h(x + e) - h(x - e)) / (2 * e), 1.0)
    d2 = _richardson(lambda e: (h(x + e) - 2 * h(x) + h(x - e)) / e**2, 1.0)
    d3 = _richardson(
        lambda e: (h(x + 2 * e) - 2 * h(x + e) + 2 * h(x - e) - h(x - 2 * e)) / (2 * e**3), 1.0
    )
    _, g1, g2, g3, _ = h_derivatives(x, t, cfg)
    assert abs(d1 - g1) / abs(g1) < 1e-6
    assert abs(d2 - g2) / abs(g2) < 1e-6
    assert abs(d3 - g3) / abs(g3) < 1e-6


# -------------------------------------------------------------------- saddle


def test_saddle_stationarity():
    info = saddle(_cfg(alpha=1.0, t=10**6))
    assert abs(info.stationarity) < 1e-9
    assert info.kappa > 0.0
    assert info.d > 0.0


def test_saddle_asymptotics_at_large_t():
    info = saddle(_cfg(alpha=1.0, t=10**8))
    assert info.x_c / info.x_c_asym == pytest.approx(1.0, abs=0.10)
    assert info.kappa / info.kappa_asym == pytest.approx(1.0, abs=0.10)


def test_saddle_curvature_matches_profile_width():
    # the Laplace width 1/sqrt(kappa) agrees with the realized index spread
    cfg = _cfg(alpha=2.0, t=10**5)
    info = saddle(cfg)
    ks = np.arange(cfg.x0, cfg.t + 1, dtype=float)
    h = np.array([log_family_size(k, cfg.t, cfg) for k in ks[:: max(1, len(ks) // 4096)]])
    ks = ks[:: max(1, len(ks) // 4096)]
    w = np.exp(h - np.max(h))
    mean = np.sum(ks * w) / np.sum(w)
    spread = math.sqrt(np.sum((ks - mean) ** 2 * w) / np.sum(w))
    assert spread == pytest.approx(1.0 / math.sqrt(info.kappa), rel=0.05)


# -------------------------------------------------------------- wave profile


def test_profile_normalization_exact():
    prof = wave_profile(_cfg(alpha=1.0, t=3000))
    assert prof.phi[-1] == 1.0
    assert prof.phi_at(prof.fitness[-1]) == 1.0
    assert prof.phi_at(0.0) == 0.0
    assert np.all(np.diff(prof.phi) >= 0.0)


def test_profile_gaussian_limit():
    for alpha in (1.0, 2.0):
        prof = wave_profile(_cfg(alpha=alpha, t=10**6))
        for y in (-2.0, -1.0, 0.0, 1.0, 2.0):
            got = prof.phi_at(prof.s_mean + prof.sigma * y)
            assert abs(got - gaussian_cdf(y)) < 0.02


def test_profile_mean_tracks_location_trend():
    # ratio to the predicted location improves monotonically toward 1
    ratios = []
    for t in (10**4, 10**5, 10**6):
        cfg = _cfg(alpha=2.0, t=t)
        prof = wave_profile(cfg)
        ratios.append(prof.s_mean / wave_location(cfg.tail, float(t)))
    assert abs(ratios[2] - 1.0) < abs(ratios[1] - 1.0) < abs(ratios[0] - 1.0)


def test_profile_width_exponent():
    from gumbel_waves.analysis import width_exponent

    for alpha, target in ((1.0, 0.5), (2.0, 0.0), (3.0, -1.0 / 6.0)):
        pts = []
        for t in np.unique(np.logspace(4, 6, 13).astype(int)):
            prof = wave_profile(_cfg(alpha=alpha, t=int(t)))
            pts.append((float(t), prof.sigma))
        slope, _ = width_exponent(pts, burn_in=0.0)
        assert abs(slope - target) < 0.05


def test_prefix_sums_match_quadrature_near_peak():
    # |sum_{k<=x} e^h - integral| <= 7 e^{h(x_c)} in a window around the peak
    quad = pytest.importorskip("scipy.integrate")
    cfg = _cfg(alpha=1.0, t=20000)
    info = saddle(cfg)
    t = float(cfg.t)
    h_max = info.h_max

    def f(y):
        return math.exp(h_derivatives(y, t, cfg)[0] - h_max)

    lo = int(info.x_c - 3.0 / math.sqrt(info.kappa))
    hi = int(info.x_c + 3.0 / math.sqrt(info.kappa))
    total = math.fsum(f(k) for k in range(lo, hi + 1))
    integral, _ = quad.quad(f, lo, hi, limit=200)
    assert abs(total - integral) <= 7.0


def test_profile_rejects_nonconcave_grid():
    # strong slowly-varying factor at a short horizon: the sign pattern only
    # starts past the peak, which the profile must refuse
    cfg = DfmmConfig(
        TypeI(1, 1.0, SlowlyVarying(((1, 3.0),))), beta=0.3, x0=3, t=40
    )
    with pytest.raises(ConcavityError):
        wave_profile(cfg)
    prof = wave_profile(cfg, check_signs=False)
    assert prof.concavity_from != 0


def test_config_validation():
    with pytest.raises(ValueError):
        DfmmConfig(TypeI(1, 1.0), beta=1.5, x0=8, t=100)
    with pytest.raises(ValueError):
        DfmmConfig(TypeI(1, 1.0), beta=0.1, x0=50, t=10)
    with pytest.raises(ValueError):
        _cfg(alpha=1.0, x0=1, t=100)  # scale undefined at 1
