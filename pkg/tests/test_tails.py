import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gumbel_waves.tails import (
    DiscreteStretched,
    GrowthPrediction,
    SlowlyVarying,
    TailDomainError,
    TypeI,
    TypeII,
    TypeIIPrediction,
    cal_g,
    chi_log,
    fittest_scale,
    gaussian_cdf,
    iterexp,
    iterlog,
    log_tail,
    predict,
    sample_fitness,
    statistic_targets,
    tail_from_config,
    tail_quantile,
    tail_quantile_log,
    tail_to_config,
    u_envelope_log,
    wave_location,
    wave_width,
    w_statistic_log,
    x_statistic,
)


# ----------------------------------------------------------------- log_tail


def test_type1_simple_value():
    spec = TypeI(1, 1.0)
    assert log_tail(spec, 1.0) == pytest.approx(-1.0, abs=1e-15)


def test_discrete_below_support():
    spec = DiscreteStretched(1.0, math.log(2.0))
    assert log_tail(spec, math.log(2.0) - 1e-12) == 0.0
    assert log_tail(spec, -5.0) == 0.0


def test_discrete_left_limits_match_mass_sums():
    # oracle: brute-force partial sums of the grid masses
    spec = DiscreteStretched(0.7, 0.31)
    masses = [math.exp(spec.log_mass(i)) for i in range(1, 2001)]
    for i in range(1, 51):
        tail_sum = math.fsum(masses[i - 1 :])  # P(F >= f_i) = G(f_i^-)
        just_below = spec.grid_point(i) * (1.0 - 1e-12)
        assert log_tail(spec, just_below) == pytest.approx(math.log(tail_sum), abs=1e-9)
        assert log_tail(spec, just_below) == pytest.approx(-spec.c * (i - 1), abs=1e-9)


def test_type1_domain_error_inside_l_factor():
    spec = TypeI(1, 1.0, SlowlyVarying(((2, 1.0),)))
    # below e the iterated log inside L is undefined, but that is below the
    # support minimum, hence G = 1 there
    assert log_tail(spec, 1.5) == 0.0
    with pytest.raises(TailDomainError):
        spec.sv.log_at(1.5)
    with pytest.raises(TailDomainError):
        iterlog(1.0, 2)


def test_monotone_nonincreasing():
    specs = [
        TypeI(1, 0.8),
        TypeI(2, 1.5, SlowlyVarying(((1, 0.4),))),
        TypeII(1, 1.0),
        DiscreteStretched(2.0, 1.0),
    ]
    for spec in specs:
        xs = np.linspace(spec.x_min + 1e-9 if not isinstance(spec, DiscreteStretched) else 0.0, 50.0, 400)
        vals = [log_tail(spec, float(x)) for x in xs]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


# ----------------------------------------------------------------- quantile


def test_quantile_type1_closed_forms():
    assert tail_quantile(TypeI(1, 1.0), math.exp(-3.0)) == pytest.approx(3.0, rel=1e-14)
    assert tail_quantile(TypeI(2, 1.0), math.exp(-math.exp(2.0))) == pytest.approx(2.0, rel=1e-14)


def test_quantile_discrete_scan_oracle():
    spec = DiscreteStretched(2.0, 1.0)
    p = 0.3
    # oracle: scan tail sums until the infimum definition is met
    i = 1
    while math.exp(log_tail(spec, spec.grid_point(i))) > p:
        i += 1
    assert i == 2
    assert tail_quantile(spec, p) == pytest.approx(spec.grid_point(2), rel=1e-15)
    assert tail_quantile(spec, p) == pytest.approx(math.sqrt(2.0), rel=1e-15)


def test_quantile_roundtrip_continuous():
    specs = [
        TypeI(1, 1.0),
        TypeI(1, 2.5, SlowlyVarying(((1, 0.5),))),
        TypeI(1, 0.7, SlowlyVarying(((1, -0.3), (2, 0.2)))),
        TypeII(1, 1.3),
    ]
    for spec in specs:
        cap = log_tail(spec, spec.x_min) if not isinstance(spec, TypeII) else 0.0
        for lp in np.linspace(-690.0, -1e-3, 120):
            if lp >= cap:
                continue
            x = tail_quantile_log(spec, float(lp))
            assert log_tail(spec, x) == pytest.approx(float(lp), abs=2e-10)


def test_quantile_atom_levels_return_support_minimum():
    spec = TypeI(2, 1.0)  # G(0) = exp(-1): mass 1 - 1/e at the minimum
    assert log_tail(spec, spec.x_min) == pytest.approx(-1.0)
    assert tail_quantile(spec, 0.9) == spec.x_min
    assert tail_quantile(spec, 1.0) == spec.x_min


def test_equation_identity_type1():
    # log^(n)(1/G(x)) - x^alpha L(x) = 0 on the domain grid
    for spec in (TypeI(1, 1.5), TypeI(2, 0.9, SlowlyVarying(((1, 0.25),)))):
        for x in np.linspace(max(spec.x_min, 1.2) + 0.5, 40.0, 60):
            lhs = iterlog(-log_tail(spec, float(x)), spec.n - 1)
            gi = math.exp(spec.alpha * math.log(x) + spec.sv.log_at(float(x)))
            assert lhs == pytest.approx(gi, rel=1e-10)


# ----------------------------------------------------------------- sampling


class _StubRng:
    def __init__(self, value):
        self.value = value

    def random(self, size=None):
        return self.value if size is None else np.full(size, self.value)


def test_sample_inverse_transform_passthrough():
    spec = TypeI(1, 1.0)
    u = math.exp(log_tail(spec, 5.0))
    assert sample_fitness(spec, _StubRng(u)) == pytest.approx(5.0, rel=1e-12)


def test_sample_ks_against_tail():
    spec = TypeI(1, 2.0)
    rng = np.random.default_rng(20240813)
    n = 10**6
    xs = np.sort(sample_fitness(spec, rng, size=n))
    # D_n = sup |F_emp - F| computed at the sample points (F = 1 - G)
    cdf = 1.0 - np.exp(-(xs**2.0))
    i = np.arange(1, n + 1)
    d = max(np.max(np.abs(i / n - cdf)), np.max(np.abs((i - 1) / n - cdf)))
    assert d < 0.002


def test_sample_discrete_first_mass():
    spec = DiscreteStretched(1.0, 0.9)
    rng = np.random.default_rng(7)
    n = 200_000
    xs = sample_fitness(spec, rng, size=n)
    p1 = math.exp(spec.log_mass(1))
    freq = np.mean(np.isclose(xs, spec.grid_point(1)))
    se = math.sqrt(p1 * (1.0 - p1) / n)
    assert abs(freq - p1) < 3.0 * se


# ----------------------------------------------------------------- predictors


def test_predict_values_at_t100():
    pred = predict(TypeI(1, 1.0), 100.0)
    assert isinstance(pred, GrowthPrediction)
    assert pred.u == pytest.approx(100.0 * math.log(100.0), rel=1e-12)
    assert pred.v == pytest.approx(100.0, rel=1e-12)
    assert pred.s == pytest.approx(10.0, rel=1e-12)
    assert pred.exponent_target == 1.0


def test_wave_location_and_width_closed_form():
    for alpha in (0.5, 1.0, 2.0, 3.0):
        spec = TypeI(1, alpha)
        for t in (10.0, 1e4, 1e8):
            assert wave_location(spec, t) == pytest.approx((t / alpha) ** (1.0 / alpha), rel=1e-12)
            assert wave_width(spec, t) == pytest.approx(
                wave_location(spec, t) / math.sqrt(alpha * t), rel=1e-12
            )


def test_fittest_scale_no_log_factor_for_n2():
    # the log factor only enters at tail index 1
    spec = TypeI(2, 2.0)
    t = 1e6
    y = math.log(t)
    assert fittest_scale(spec, t) == pytest.approx(y ** 0.5, rel=1e-12)


def test_predictor_consistency_identity():
    for alpha in (0.5, 1.0, 2.0, 4.0):
        spec = TypeI(1, alpha)
        for t in (1e2, 1e6, 1e12):
            u = fittest_scale(spec, t)
            assert u**alpha * alpha / (t * math.log(t)) == pytest.approx(1.0, rel=1e-12)


def test_predictor_consistency_with_slowly_varying():
    # g(u(t)) / (t * log t / alpha) -> 1; a mild factor converges within 1%
    # by t = 1e12, stronger factors approach monotonically
    alpha = 1.0
    mild = TypeI(1, alpha, SlowlyVarying(((1, 0.05),)))
    u = fittest_scale(mild, 1e12)
    g = u**alpha * math.exp(mild.sv.log_at(u))
    ratio = g / (1e12 * math.log(1e12) / alpha)
    assert abs(ratio - 1.0) < 0.01

    strong = TypeI(1, alpha, SlowlyVarying(((1, 0.5), (2, -0.3))))
    ratios = []
    for t in (1e6, 1e9, 1e12):
        u = fittest_scale(strong, t)
        g = u**alpha * math.exp(strong.sv.log_at(u))
        ratios.append(g / (t * math.log(t) / alpha))
    assert abs(ratios[2] - 1.0) < abs(ratios[1] - 1.0) < abs(ratios[0] - 1.0)


def test_width_to_location_ratio_identity():
    spec = TypeI(3, 2.0, SlowlyVarying(((1, 0.3),)))
    for t in (1e4, 1e6, 1e8):
        expect = 1.0 / math.sqrt(spec.alpha * t * iterlog(t, 1) * iterlog(t, 2))
        assert wave_width(spec, t) / wave_location(spec, t) == pytest.approx(expect, rel=1e-12)


def test_type2_prediction_targets():
    p1 = predict(TypeII(1, 2.0), 100.0)
    assert isinstance(p1, TypeIIPrediction)
    assert p1.x_target == pytest.approx(1.5)
    assert p1.w_target == pytest.approx(0.5)
    p2 = predict(TypeII(2, 3.0), 100.0)
    assert p2.x_target == pytest.approx(0.25)
    p3 = predict(TypeII(4, 0.5), 100.0)
    assert p3.x_target == pytest.approx(-0.5)


def test_type2_statistics_exact_algebra():
    # synthetic trajectories built to sit exactly on the limits
    for alpha in (0.5, 1.0, 2.0):
        spec = TypeII(1, alpha)
        xt, wt = statistic_targets(spec)
        for t in (50.0, 1e3, 1e6):
            log_x = t ** (1.0 + 1.0 / alpha)
            assert x_statistic(spec, t, log_x) == pytest.approx(xt, rel=1e-12)
            assert w_statistic_log(spec, t, t ** (1.0 / alpha)) == pytest.approx(wt, rel=1e-12)
        spec2 = TypeII(2, alpha)
        xt2, _ = statistic_targets(spec2)
        for t in (1e3, 1e4):
            log_x = math.exp(t ** (1.0 / (1.0 + alpha)))
            assert x_statistic(spec2, t, log_x) == pytest.approx(xt2, rel=1e-12)
        spec3 = TypeII(3, alpha)
        xt3, _ = statistic_targets(spec3)
        for t in (200.0, 1e3):
            log_x = math.exp(t * math.log(t) ** (-alpha))
            assert x_statistic(spec3, t, log_x) == pytest.approx(xt3, rel=1e-12)


def test_chi_and_envelope_algebra():
    assert chi_log(100.0, 1, 1.5) == pytest.approx(1.5 * math.log(100.0), rel=1e-14)
    assert chi_log(100.0, 2, 0.5) == pytest.approx(10.0, rel=1e-14)
    assert chi_log(1e4, 3, 2.0) == pytest.approx(1e4 / math.log(1e4) ** 2, rel=1e-14)
    assert u_envelope_log(100.0, 1, 1.5, 2.0) == pytest.approx(
        1.5 * math.log(100.0) - 2.0 * math.log(100.0), rel=1e-14
    )
    assert cal_g(math.exp(10.0), 1, 2.0) == pytest.approx(10.0 * 10.0**2, rel=1e-12)


def test_gaussian_cdf_values():
    assert gaussian_cdf(0.0) == 0.5
    assert gaussian_cdf(math.inf) == 1.0
    mp = pytest.importorskip("mpmath")
    for y in (-3.0, -1.0, 0.3, 1.0, 4.0):
        expect = float(0.5 * mp.erfc(-y / mp.sqrt(2)))
        assert gaussian_cdf(y) == pytest.approx(expect, abs=1e-13)


# ----------------------------------------------------------------- properties


@settings(max_examples=40, deadline=None)
@given(
    alpha=st.floats(min_value=0.3, max_value=4.0),
    gamma=st.floats(min_value=-0.5, max_value=1.5),
    n=st.integers(min_value=1, max_value=2),
)
def test_roundtrip_property(alpha, gamma, n):
    spec = TypeI(n, alpha, SlowlyVarying(((1, gamma),)))
    cap = log_tail(spec, spec.x_min * (1.0 + 1e-9))
    for lp in (-2.0, -50.0, -300.0):
        if lp >= cap:
            continue
        x = tail_quantile_log(spec, lp)
        assert log_tail(spec, x) == pytest.approx(lp, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(
    alpha=st.floats(min_value=0.4, max_value=3.0),
    c=st.floats(min_value=0.2, max_value=50.0),
    lp=st.floats(min_value=-500.0, max_value=-1e-6),
)
def test_discrete_quantile_is_infimum(alpha, c, lp):
    spec = DiscreteStretched(alpha, c)
    x = tail_quantile_log(spec, lp)
    assert log_tail(spec, x) <= lp + 1e-9
    i = spec.grid_index(x)
    if i > 1:
        assert log_tail(spec, spec.grid_point(i - 1)) > lp


# ----------------------------------------------------------------- config io


def test_config_roundtrip_exact_decimals():
    specs = [
        TypeI(1, 0.1, SlowlyVarying(((1, 0.30000000000000004), (3, -2.5)))),
        TypeII(2, 1.7),
        DiscreteStretched(2.0, 20.0 * math.log(10.0)),
    ]
    for spec in specs:
        text = tail_to_config(spec)
        back = tail_from_config(text)
        assert type(back) is type(spec)
        assert back.alpha == spec.alpha
        if isinstance(spec, DiscreteStretched):
            assert back.c == spec.c
        else:
            assert back.n == spec.n
            assert back.sv.factors == spec.sv.factors


def test_domain_errors():
    with pytest.raises(ValueError):
        TypeI(0, 1.0)
    with pytest.raises(ValueError):
        TypeI(1, -1.0)
    with pytest.raises(ValueError):
        SlowlyVarying(((1, 0.5), (1, 0.2)))
    with pytest.raises(ValueError):
        tail_quantile(TypeI(1, 1.0), 0.0)
    with pytest.raises(TailDomainError):
        predict(TypeI(1, 1.0), 1.0)  # log t not positive enough
    assert iterexp(1.0, 2) == pytest.approx(math.exp(math.e))
