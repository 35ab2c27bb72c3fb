"""Deterministic frequency recursion for the multiple-mutant dynamics on
the discrete fitness grid f_k = (c*k)**(1/alpha).

Each step multiplies class k by (1-beta) f_k / S_t and adds the mutation
influx beta * p_k, where the influx is truncated to classes whose expected
mutant count beta * X(t+1) * p_k exceeds one; the total size advances by
the factor S_t.  Frequencies are carried in log space throughout: the
leading classes are seeded at levels like exp(-log X), far below any
linear floating-point range, and their compounded growth is exactly what
moves the wave forward.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

__all__ = ["QmmConfig", "FrequencyState", "QmmSnapshot", "QmmResult", "qmm_init", "qmm_step", "density", "density_at", "qmm_run", "snapshot_to_csv"]

_LOG10 = math.log(10.0)


class WindowOverflowError(RuntimeError):
    """The active grid window exceeded the configured limit."""


@dataclass(frozen=True)
class QmmConfig:
    alpha: float
    c: float = 20.0 * _LOG10
    beta: float = 1e-20
    log_x0: float = 100.0 * _LOG10
    horizon: int = 100_000
    window_limit: int = 2_000_000

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0):
            raise ValueError("alpha must be positive")
        if not (self.c > 0.0):
            raise ValueError("grid constant c must be positive")
        if not (0.0 <= self.beta < 1.0):
            raise ValueError("beta must lie in [0, 1)")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")

    def grid_fitness(self, k: np.ndarray) -> np.ndarray:
        return (self.c * k) ** (1.0 / self.alpha)

    def fitness_scalar(self, k: int) -> float:
        return (self.c * k) ** (1.0 / self.alpha)

    def log_mass(self, k: np.ndarray) -> np.ndarray:
        """log p_k for the mutation influx."""
        return -self.c * k + math.log(math.expm1(self.c))


class _GridCache:
    """Fitness/log-fitness/log-mass arrays over 1..capacity, grown on demand."""

    def __init__(self, cfg: QmmConfig):
        self.cfg = cfg
        self.capacity = 0
        self.f = np.empty(0)
        self.log_f = np.empty(0)
        self.log_p = np.empty(0)
        self.grow(1024)

    def grow(self, needed: int) -> None:
        if needed <= self.capacity:
            return
        cap = max(needed, 2 * self.capacity)
        k = np.arange(1, cap + 1, dtype=float)
        self.f = self.cfg.grid_fitness(k)
        self.log_f = np.log(self.f)
        self.log_p = self.cfg.log_mass(k)
        self.capacity = cap

    def view(self, k_min: int, k_max: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        self.grow(k_max)
        sl = slice(k_min - 1, k_max)
        return self.f[sl], self.log_f[sl], self.log_p[sl]


_CACHES: dict = {}


def _cache_for(cfg: QmmConfig) -> _GridCache:
    key = (cfg.alpha, cfg.c)
    cache = _CACHES.get(key)
    if cache is None:
        cache = _CACHES[key] = _GridCache(cfg)
    return cache


@dataclass(frozen=True)
class FrequencyState:
    """Frequencies over the active window [k_min, k_max], in log space."""

    t: int
    k_min: int
    k_max: int
    log_psi: np.ndarray
    log_x: float
    s_mean: float
    sigma: float

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def frequencies(self) -> np.ndarray:
        return np.exp(self.log_psi)


def _make_state(t: int, k_min: int, k_max: int, log_psi: np.ndarray, log_x: float, cfg: QmmConfig) -> FrequencyState:
    f, _, _ = _cache_for(cfg).view(k_min, k_max)
    w = np.exp(log_psi)
    s_mean = float(np.dot(w, f))
    var = float(np.dot(w, (f - s_mean) ** 2))
    return FrequencyState(t, k_min, k_max, log_psi, log_x, s_mean, math.sqrt(max(var, 0.0)))


def qmm_init(cfg: QmmConfig) -> FrequencyState:
    """All mass on the first grid class."""
    return _make_state(0, 1, 1, np.zeros(1), cfg.log_x0, cfg)


def _active_boundary(cfg: QmmConfig, log_x_next: float) -> int:
    """Largest k whose expected mutant count beta*X(t+1)*p_k exceeds 1."""
    if cfg.beta == 0.0:
        return 0
    log_e = math.log(math.expm1(cfg.c))
    base = math.log(cfg.beta) + log_x_next + log_e

    def active(k: int) -> bool:
        return base - cfg.c * k > 0.0

    k = int(math.floor(base / cfg.c))
    while active(k + 1):
        k += 1
    while k >= 1 and not active(k):
        k -= 1
    return k


def qmm_step(state: FrequencyState, cfg: QmmConfig) -> FrequencyState:
    """One generation of the frequency recursion, renormalized."""
    log_s = math.log(state.s_mean)
    log_x_next = state.log_x + log_s

    k_act = _active_boundary(cfg, log_x_next)
    k_max = max(state.k_max, min(k_act, cfg.window_limit))
    if k_act > cfg.window_limit:
        raise WindowOverflowError(
            f"active window {k_act} exceeds the configured limit {cfg.window_limit}"
        )
    k_min = state.k_min
    width = k_max - k_min + 1
    _, log_f, log_p = _cache_for(cfg).view(k_min, k_max)
    log_psi = np.full(width, -math.inf)
    log_psi[: len(state.log_psi)] = state.log_psi

    selection = log_psi + (math.log1p(-cfg.beta) - log_s) + log_f
    if cfg.beta > 0.0 and k_act >= k_min:
        cut = k_act - k_min + 1
        nxt = selection.copy()
        with np.errstate(invalid="ignore"):
            nxt[:cut] = np.logaddexp(selection[:cut], math.log(cfg.beta) + log_p[:cut])
    else:
        nxt = selection
    peak = float(np.max(nxt))
    total = peak + math.log(float(np.sum(np.exp(nxt - peak))))
    nxt -= total

    # advance the trailing edge only where both the current value and the
    # per-step mutation reseed are negligible
    floor = math.log(1e-320)
    log_beta = math.log(cfg.beta) if cfg.beta > 0.0 else -math.inf
    drop = 0
    while drop < width - 1 and nxt[drop] < floor and log_beta + log_p[drop] < floor:
        drop += 1
    if drop:
        nxt = nxt[drop:]
        k_min += drop
        peak = float(np.max(nxt))
        total = peak + math.log(float(np.sum(np.exp(nxt - peak))))
        nxt -= total

    return _make_state(state.t + 1, k_min, k_max, nxt, log_x_next, cfg)


def density(state: FrequencyState, cfg: QmmConfig, half_bin: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    """Binned density over grid centers: at f_k, the mass of classes
    k-j..k+j divided by the width of the cells they occupy.

    Class i is treated as occupying [(f_{i-1}+f_i)/2, (f_i+f_{i+1})/2), so
    the estimator is free of the (2j+1)/(2j) edge bias and its window stays
    centered on f_k.
    """
    if half_bin < 1:
        raise ValueError("half bin width must be >= 1")
    j = half_bin
    k = state.indices
    if len(k) <= 2 * j:
        raise ValueError("active window too narrow for this bin size")
    w = state.frequencies()
    cum = np.concatenate([[0.0], np.cumsum(w)])
    mass = cum[2 * j + 1 :] - cum[: -2 * j - 1]
    # cell boundaries from k_min-1 to k_max+1
    kk = np.arange(state.k_min - 1, state.k_max + 2, dtype=float)
    f_ext = np.where(kk >= 1, cfg.grid_fitness(np.maximum(kk, 1.0)), 0.0)
    bounds = 0.5 * (f_ext[:-1] + f_ext[1:])  # boundary below class k_min..above k_max
    width = bounds[2 * j + 1 :] - bounds[: -2 * j - 1]
    f = cfg.grid_fitness(k.astype(float))
    return f[j:-j], mass / width


def density_at(state: FrequencyState, cfg: QmmConfig, fitness: float, half_bin: int = 2) -> float:
    """Density at an arbitrary fitness: the bin around the grid class k
    with f_k <= fitness < f_{k+1}."""
    j = half_bin
    k = int(math.floor(fitness**cfg.alpha / cfg.c))
    while k >= 1 and cfg.fitness_scalar(k) > fitness:
        k -= 1
    while cfg.fitness_scalar(k + 1) <= fitness:
        k += 1
    lo = max(k - j, state.k_min)
    hi = min(k + j, state.k_max)
    if hi < lo:
        return 0.0
    w = state.frequencies()
    mass = float(np.sum(w[lo - state.k_min : hi - state.k_min + 1]))
    f_lo = cfg.fitness_scalar(lo - 1) if lo > 1 else 0.0
    lower = 0.5 * (f_lo + cfg.fitness_scalar(lo))
    upper = 0.5 * (cfg.fitness_scalar(hi) + cfg.fitness_scalar(hi + 1))
    return mass / (upper - lower)


@dataclass(frozen=True)
class QmmSnapshot:
    t: int
    s_mean: float
    sigma: float
    log10_x: float
    state: FrequencyState


@dataclass
class QmmResult:
    config: QmmConfig
    series: List[Tuple[int, float, float, float]] = field(default_factory=list)  # t, S, sigma, log10X
    snapshots: List[QmmSnapshot] = field(default_factory=list)


def qmm_run(
    cfg: QmmConfig,
    record_times: Sequence[int],
    series_times: Optional[Sequence[int]] = None,
) -> QmmResult:
    """Run to the horizon, storing full snapshots at ``record_times`` and
    (t, S, sigma, log10 X) rows at ``series_times`` (default: every
    power-of-two generation plus the horizon)."""
    records = sorted(set(int(t) for t in record_times))
    if records and (records[0] < 0 or records[-1] > cfg.horizon):
        raise ValueError("record times must lie in [0, horizon]")
    if series_times is None:
        series = sorted(
            {0, cfg.horizon} | {2**j for j in range(64) if 2**j <= cfg.horizon}
        )
    else:
        series = sorted(set(int(t) for t in series_times))
    result = QmmResult(config=cfg)
    state = qmm_init(cfg)
    series_set, record_set = set(series), set(records)

    def note(st: FrequencyState) -> None:
        if st.t in series_set:
            result.series.append((st.t, st.s_mean, st.sigma, st.log_x / _LOG10))
        if st.t in record_set:
            result.snapshots.append(
                QmmSnapshot(st.t, st.s_mean, st.sigma, st.log_x / _LOG10, st)
            )

    note(state)
    for _ in range(cfg.horizon):
        state = qmm_step(state, cfg)
        note(state)
    return result


def snapshot_to_csv(snap: QmmSnapshot, cfg: QmmConfig, path: str, half_bin: int = 2) -> None:
    """Header row with the scalars, then the binned density rows."""
    width = snap.state.k_max - snap.state.k_min + 1
    j = max(1, min(half_bin, (width - 1) // 2))
    if width >= 3:
        centers, dens = density(snap.state, cfg, j)
    else:
        centers, dens = np.empty(0), np.empty(0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "S", "sigma", "log10X"])
        writer.writerow([snap.t, repr(snap.s_mean), repr(snap.sigma), repr(snap.log10_x)])
        writer.writerow(["F", "psi_density"])
        for f, d in zip(centers, dens):
            writer.writerow([repr(float(f)), repr(float(d))])
