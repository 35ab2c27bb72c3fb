import math

import numpy as np
import pytest

from gumbel_waves.gw import (
    GwConfig,
    bbcond_violations,
    envelope,
    extinction_probability,
    gw_simulate_hybrid,
    gw_step,
    poisson_tail_bound_lower,
    poisson_tail_bound_upper,
    run_ensemble,
)


def _poisson_cdf(k: int, mean: float) -> float:
    # oracle: direct summation with compensated arithmetic
    terms = []
    log_term = -mean
    for m in range(0, k + 1):
        if m > 0:
            log_term += math.log(mean / m)
        terms.append(math.exp(log_term))
    return math.fsum(terms)


def _poisson_upper_tail(k: int, mean: float) -> float:
    # P(Poisson(mean) >= k), summed upward to avoid 1 - cdf cancellation
    log_term = -mean
    for m in range(1, k + 1):
        log_term += math.log(mean / m)
    terms = [math.exp(log_term)]
    m = k
    while terms[-1] > 1e-320 or m < k + 10:
        m += 1
        log_term += math.log(mean / m)
        terms.append(math.exp(log_term))
        if m > k + 10_000:
            break
    return math.fsum(terms)


# ----------------------------------------------------------------- gw_step


def test_step_absorbing_zero():
    rng = np.random.default_rng(0)
    assert gw_step(0, 5.0, rng) == 0


def test_step_mean_monte_carlo():
    rng = np.random.default_rng(42)
    n = 10**6
    total = 0
    for _ in range(n):
        total += gw_step(1, 2.0, rng)
    mean = total / n
    assert abs(mean - 2.0) < 3.0 * math.sqrt(2.0 / n)


def test_step_extinction_mass():
    rng = np.random.default_rng(3)
    n = 10**5
    hits = sum(1 for _ in range(n) if gw_step(4, 0.25, rng) == 0)
    p = math.exp(-1.0)
    se = math.sqrt(p * (1.0 - p) / n)
    assert abs(hits / n - p) < 3.0 * se


def test_step_refuses_past_cap():
    rng = np.random.default_rng(0)
    with pytest.raises(OverflowError):
        gw_step(2**32, 10.0, rng)


# ----------------------------------------------------------------- bounds


def test_lower_bound_value():
    got = poisson_tail_bound_lower(0.5, 10.0)
    expect = 10.0 * math.exp(-10.0 * (1.0 - 0.5 + 0.5 * math.log(0.5)))
    assert got == pytest.approx(expect, rel=1e-15)
    assert got == pytest.approx(2.1561430397, rel=1e-9)


def test_upper_bound_simplification_for_large_ratio():
    # at ratio e^2 the bound collapses below 2*exp(-mean)
    big_b = math.e**2
    for mean in (0.5, 3.0, 12.0):
        assert poisson_tail_bound_upper(big_b, mean) <= 2.0 * math.exp(-mean)


def test_bounds_dominate_exact_cdf_grid():
    # property over the full parameter grid: analytic bound >= exact tail
    for theta in (5.0, 10.0, 20.0, 50.0):
        for b in (0.3, 0.5, 0.7):
            exact = _poisson_cdf(math.floor(b * theta), theta)
            assert exact <= poisson_tail_bound_lower(b, theta)
        for big_b in (1.5, 2.0, math.e**2):
            k = math.ceil(big_b * theta)
            exact = _poisson_upper_tail(k, theta)
            assert exact <= poisson_tail_bound_upper(big_b, theta)


def test_monte_carlo_tail_within_bound():
    rng = np.random.default_rng(11)
    n = 10**5
    draws = rng.poisson(10.0, size=n)
    freq = np.mean(draws <= 5)
    assert freq <= poisson_tail_bound_lower(0.5, 10.0)


def test_bound_preconditions():
    with pytest.raises(ValueError):
        poisson_tail_bound_lower(1.5, 10.0)
    with pytest.raises(ValueError):
        poisson_tail_bound_lower(0.01, 10.0)  # floor(b*theta) = 0
    with pytest.raises(ValueError):
        poisson_tail_bound_upper(0.9, 10.0)


# ----------------------------------------------------------------- envelope


def test_envelope_values_at_50():
    env = envelope(50.0, 0.25)
    assert env.relaxed_halfwidth == pytest.approx(2.0 * 50.0**-0.25, rel=1e-12)
    assert env.relaxed_halfwidth == pytest.approx(0.752119, abs=1e-5)
    assert env.failure_bound == pytest.approx(math.exp(-math.sqrt(50.0) / 5.0), rel=1e-12)
    assert env.failure_bound == pytest.approx(0.243117, abs=1e-5)
    assert env.halfwidth(10) <= env.relaxed_halfwidth


def test_envelope_eps_domain():
    with pytest.raises(ValueError):
        envelope(50.0, 0.0)
    with pytest.raises(ValueError):
        envelope(50.0, 0.5)


def test_envelope_admissibility():
    assert bbcond_violations(1.1, 0.25)  # clearly inadmissible
    with pytest.raises(ValueError):
        envelope(1.1, 0.25, require_admissible=True)
    # a sufficiently large mean satisfies every printed condition
    assert bbcond_violations(1e6, 0.25) == []
    assert envelope(1e6, 0.25, require_admissible=True).admissible


# ----------------------------------------------------------------- hybrid


def test_hybrid_subcritical_extinct():
    cfg = GwConfig(theta=0.5, switch_threshold=10**6, horizon=100)
    extinct = 0
    n = 10**4
    for rep in range(n):
        rng = np.random.default_rng(np.random.SeedSequence(5, spawn_key=(rep,)))
        path = gw_simulate_hybrid(cfg, rng)
        extinct += path.extinct
    assert abs(extinct / n - extinction_probability(0.5)) < 0.01
    assert extinction_probability(0.5) == 1.0


def test_hybrid_band_containment():
    cfg = GwConfig(theta=50.0, switch_threshold=10**6, horizon=20)
    env = envelope(50.0, 0.25)
    log_theta = math.log(50.0)
    n = 10**4
    violations = 0
    for rep in range(n):
        rng = np.random.default_rng(np.random.SeedSequence(17, spawn_key=(rep,)))
        path = gw_simulate_hybrid(cfg, rng)
        for t in range(1, cfg.horizon + 1):
            ratio = math.exp(path.sizes[t].log - t * log_theta) if not path.sizes[t].is_zero else 0.0
            if abs(ratio - 1.0) > env.relaxed_halfwidth:
                violations += 1
                break
    # one-sided test at significance 1e-3 against the analytic bound
    p0 = env.failure_bound
    z = 3.0902  # 99.9% one-sided normal quantile
    assert violations / n <= p0 + z * math.sqrt(p0 * (1.0 - p0) / n)


def test_hybrid_degenerate_threshold_is_deterministic():
    cfg = GwConfig(theta=3.0, switch_threshold=1, horizon=30)
    rng = np.random.default_rng(0)
    path = gw_simulate_hybrid(cfg, rng)
    assert path.switch_time == 0
    for t, size in enumerate(path.sizes):
        assert size.log == pytest.approx(t * math.log(3.0), rel=1e-14, abs=1e-12)


def test_hybrid_martingale_mean():
    # pure exact regime: threshold far above anything reachable
    cfg = GwConfig(theta=2.0, switch_threshold=2**30, horizon=15)
    n = 10**5
    total = 0.0
    for rep in range(n):
        rng = np.random.default_rng(np.random.SeedSequence(23, spawn_key=(rep,)))
        path = gw_simulate_hybrid(cfg, rng)
        total += path.sizes[-1].to_float()
    mean = total / n / 2.0**15
    # Var(X_t / theta^t) = (1 - theta^-t)/(theta - 1)
    sd = math.sqrt((1.0 - 2.0**-15) / 1.0)
    assert abs(mean - 1.0) < 4.0 * sd / math.sqrt(n)


def test_hybrid_switch_is_permanent_and_reproducible():
    cfg = GwConfig(theta=8.0, switch_threshold=100, horizon=40)
    p1 = gw_simulate_hybrid(cfg, np.random.default_rng(np.random.SeedSequence(9)))
    p2 = gw_simulate_hybrid(cfg, np.random.default_rng(np.random.SeedSequence(9)))
    assert p1 == p2
    assert p1.switch_time is not None
    log8 = math.log(8.0)
    for t in range(p1.switch_time, cfg.horizon):
        assert p1.sizes[t + 1].log == pytest.approx(p1.sizes[t].log + log8, rel=1e-14)


def test_ensemble_replica_streams_differ():
    cfg = GwConfig(theta=2.0, switch_threshold=1000, horizon=10)
    paths = run_ensemble(cfg, 8, seed=101)
    assert len({tuple(s.log for s in p.sizes) for p in paths}) > 1
