"""Semi-deterministic dynamics: one new family per generation with a
deterministic fitness, each growing as an independent Poisson branching
process via the hybrid simulator.

The family born at generation k has offspring mean theta_k =
(1-beta) * u(k) (set to 1 where the scale is undefined) and carries the
fitness u(k) = theta_k/(1-beta).  Slow families (theta <= 1.5) are kept on
exact sampling up to the sampler's own mean cap so their extinction
behaviour is preserved; fast families switch to deterministic growth at
the configured threshold.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .gw import POISSON_MEAN_CAP
from .logspace import log_sum
from .tails import TailDomainError, TypeI, fittest_scale

__all__ = ["SfmmConfig", "SfmmSnapshot", "SfmmResult", "family_theta", "run_sfmm", "families_to_csv"]

SLOW_THETA = 1.5


@dataclass(frozen=True)
class SfmmConfig:
    tail: TypeI
    beta: float
    horizon: int
    switch_threshold: int = 1_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.tail, TypeI):
            raise ValueError("semi-deterministic dynamics need a type I tail")
        ok = self.tail.n == 1 or (self.tail.n == 2 and self.tail.alpha < 1.0)
        if not ok:
            raise ValueError("restricted to n = 1, or n = 2 with alpha < 1")
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie in (0, 1)")
        if self.horizon < 1 or self.switch_threshold < 1:
            raise ValueError("horizon and switch threshold must be >= 1")


def family_theta(cfg: SfmmConfig, k: int) -> float:
    """Offspring mean of the family born at generation k; 1 where the
    fittest-mutant scale is undefined."""
    try:
        u = fittest_scale(cfg.tail, float(k))
    except TailDomainError:
        return 1.0
    if not (math.isfinite(u) and u > 0.0):
        return 1.0
    return (1.0 - cfg.beta) * u


@dataclass(frozen=True)
class FamilyTrace:
    k: int
    theta: float
    switch_time: Optional[int]
    alive: bool
    log_sizes: Tuple[float, ...]  # aligned with the recorded times >= k


@dataclass(frozen=True)
class SfmmSnapshot:
    """Fitness distribution across families at one recorded generation."""

    t: int
    fitness: np.ndarray  # sorted family fitness values
    log_n: np.ndarray  # log family sizes in the same order
    psi: np.ndarray  # cumulative weight at or below each fitness
    log_x: float
    s_mean: float
    sigma: float

    def psi_at(self, f: float) -> float:
        idx = int(np.searchsorted(self.fitness, f, side="right")) - 1
        if idx < 0:
            return 0.0
        return float(self.psi[idx])


@dataclass
class SfmmResult:
    config: SfmmConfig
    record_times: Tuple[int, ...]
    snapshots: List[SfmmSnapshot]
    families: List[FamilyTrace] = field(default_factory=list)


def _simulate_family(
    k: int, theta: float, cfg: SfmmConfig, record_times: Sequence[int], rng: np.random.Generator
) -> FamilyTrace:
    threshold = cfg.switch_threshold
    if theta <= SLOW_THETA:
        threshold = max(threshold, int(POISSON_MEAN_CAP / max(theta, 1.0) / 2.0))
    log_theta = math.log(theta)
    times = [t for t in record_times if t >= k]
    out: List[float] = []
    size = 1
    switch_time: Optional[int] = 0 if size >= threshold else None
    g = k
    idx = 0
    while idx < len(times) and times[idx] == g:
        out.append(0.0)  # log 1
        idx += 1
    log_at_switch = 0.0
    if switch_time is None:
        while g < cfg.horizon:
            g += 1
            size = int(rng.poisson(theta * size)) if size else 0
            if size >= threshold:
                switch_time = g
                log_at_switch = math.log(size)
                break
            log_size = math.log(size) if size else -math.inf
            while idx < len(times) and times[idx] == g:
                out.append(log_size)
                idx += 1
            if size == 0:
                while idx < len(times):
                    out.append(-math.inf)
                    idx += 1
                break
    else:
        switch_time = k
    while idx < len(times):
        t = times[idx]
        out.append(log_at_switch + (t - switch_time) * log_theta)
        idx += 1
    return FamilyTrace(
        k=k,
        theta=theta,
        switch_time=switch_time,
        alive=len(out) == 0 or out[-1] != -math.inf,
        log_sizes=tuple(out),
    )


def run_sfmm(cfg: SfmmConfig, record_times: Sequence[int]) -> SfmmResult:
    """Simulate all families and aggregate snapshots at the given times.

    Families use independent streams derived from (seed, k), so the result
    is reproducible and families stay independent.
    """
    times = tuple(sorted(set(int(t) for t in record_times)))
    if not times or times[0] < 0 or times[-1] > cfg.horizon:
        raise ValueError("record times must lie in [0, horizon]")
    traces: List[FamilyTrace] = []
    for k in range(cfg.horizon + 1):
        theta = family_theta(cfg, k)
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(k,)))
        traces.append(_simulate_family(k, theta, cfg, times, rng))

    snapshots = []
    for pos, t in enumerate(times):
        fitness = []
        log_n = []
        for trace in traces:
            if trace.k > t:
                break
            # position of t within this family's recorded times
            offset = pos - sum(1 for rt in times if rt < trace.k)
            lg = trace.log_sizes[offset]
            if lg == -math.inf:
                continue
            fitness.append(trace.theta / (1.0 - cfg.beta))
            log_n.append(lg)
        order = np.argsort(np.asarray(fitness), kind="stable")
        f_arr = np.asarray(fitness, dtype=float)[order]
        n_arr = np.asarray(log_n, dtype=float)[order]
        log_x = log_sum(n_arr.tolist())
        weights = np.exp(n_arr - log_x)
        psi = np.cumsum(weights)
        if len(psi):
            psi[-1] = 1.0
        s_mean = float(math.fsum(weights * f_arr))
        var = float(math.fsum(weights * (f_arr - s_mean) ** 2))
        snapshots.append(
            SfmmSnapshot(
                t=t,
                fitness=f_arr,
                log_n=n_arr,
                psi=psi,
                log_x=log_x,
                s_mean=s_mean,
                sigma=math.sqrt(max(var, 0.0)),
            )
        )
    return SfmmResult(config=cfg, record_times=times, snapshots=snapshots, families=traces)


def families_to_csv(result: SfmmResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "theta_k", "switch_time", "alive"])
        for trace in result.families:
            writer.writerow(
                [
                    trace.k,
                    repr(trace.theta),
                    "" if trace.switch_time is None else trace.switch_time,
                    int(trace.alive),
                ]
            )


def snapshot_to_csv(snapshot: SfmmSnapshot, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f", "Phi"])
        for f, p in zip(snapshot.fitness, snapshot.psi):
            writer.writerow([repr(float(f)), repr(float(p))])
