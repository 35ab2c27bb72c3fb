"""Exact stochastic simulation of the two selection-mutation variants.

One generation step decomposes the offspring cloud into independent Poisson
pieces: per-family non-mutant counts with means (1-beta)*F_i*c_i and a
mutant count with mean beta * sum F_i*c_i.  In the fittest-mutant variant a
single maximal mutant joins; in the multiple-mutant variant the whole cloud
joins.  Families whose abundance (or offspring mean) leaves the exact
sampling regime grow deterministically in log space, while the maximal
mutant fitness remains exact in distribution at every scale.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .gw import POISSON_MEAN_CAP
from .logspace import LogReal, log_sum
from .tails import TailSpec, sample_fitness, tail_quantile_log, tail_to_config

__all__ = [
    "ModelParams",
    "Population",
    "TrajectoryRecord",
    "Trajectory",
    "SurvivalEstimate",
    "fittest_mutant",
    "step",
    "run",
    "survival_probability",
    "trajectory_to_csv",
]

FMM = "FMM"
MMM = "MMM"


@dataclass(frozen=True)
class ModelParams:
    beta: float
    tail: TailSpec
    variant: str = FMM
    seed: int = 0
    family_cap: int = 4096
    exact_cap: int = 1_000_000
    mutant_sample_cap: int = 1024  # sample mutant fitnesses i.i.d. up to here
    top_k: int = 64  # order statistics kept above the cap (MMM)
    bulk_classes: int = 64

    def __post_init__(self) -> None:
        if not (0.0 < self.beta < 1.0):
            raise ValueError("mutation probability beta must lie in (0, 1)")
        if self.variant not in (FMM, MMM):
            raise ValueError("variant must be 'FMM' or 'MMM'")
        if self.family_cap < 2 or self.exact_cap < 1:
            raise ValueError("family_cap must be >= 2 and exact_cap >= 1")


@dataclass(frozen=True)
class Population:
    """One generation: fitness -> abundance plus its summary statistics."""

    families: Tuple[Tuple[float, LogReal], ...]  # sorted by fitness
    t: int
    log_x: float
    log_xi: float
    w: float  # largest mutant fitness this generation (0 if none)
    q: float  # largest fitness present (0 if empty)
    s_mean: float
    sigma: float
    extinct: bool
    merges: int = 0
    approx_flags: Tuple[str, ...] = ()

    @staticmethod
    def initial(families: Sequence[Tuple[float, Union[int, float, LogReal]]]) -> "Population":
        fam: Dict[float, LogReal] = {}
        for fitness, count in families:
            if fitness <= 0.0:
                raise ValueError("fitness values must be positive")
            c = count if isinstance(count, LogReal) else LogReal.from_float(float(count))
            if c.is_zero:
                continue
            fam[fitness] = fam[fitness] + c if fitness in fam else c
        stats = _stats(fam)
        log_x = stats.log_x
        return Population(
            families=tuple(sorted(fam.items())),
            t=0,
            log_x=log_x,
            log_xi=log_x,  # total offspring of generation -1 := X(0)
            w=stats.q,  # initial convention: W_0 = Q_0
            q=stats.q,
            s_mean=stats.s_mean,
            sigma=stats.sigma,
            extinct=not fam,
        )


@dataclass(frozen=True)
class _Stats:
    log_x: float
    q: float
    s_mean: float
    sigma: float


def _stats(fam: Dict[float, LogReal]) -> _Stats:
    if not fam:
        return _Stats(-math.inf, 0.0, 0.0, 0.0)
    logs = {f: c.log for f, c in fam.items() if not c.is_zero}
    if not logs:
        return _Stats(-math.inf, 0.0, 0.0, 0.0)
    log_x = log_sum(logs.values())
    q = max(logs)
    weights = {f: math.exp(lg - log_x) for f, lg in logs.items()}
    s_mean = math.fsum(w * f for f, w in weights.items())
    var = math.fsum(w * (f - s_mean) ** 2 for f, w in weights.items())
    return _Stats(log_x, q, s_mean, max(var, 0.0) ** 0.5)


def fittest_mutant(
    xi_next: Union[int, LogReal],
    beta: float,
    tail: TailSpec,
    rng: np.random.Generator,
) -> Optional[float]:
    """Largest fitness among the mutants of an offspring cloud of size N.

    Exact in distribution, P(W <= x | N) = (1 - beta*G(x))**N, via one
    uniform: the level (1 - Z**(1/N))/beta is inverted through the tail
    quantile, computed in log space so astronomically large N is fine.
    Returns None when no mutant with positive fitness arises.
    """
    if isinstance(xi_next, LogReal):
        if xi_next.is_zero:
            return None
        log_n = xi_next.log
    else:
        if xi_next < 0:
            raise ValueError("offspring count must be nonnegative")
        if xi_next == 0:
            return None
        log_n = math.log(xi_next)
    u = rng.random()
    if u == 0.0:
        u = 2.0**-53
    log_z = math.log1p(-u)  # z = 1 - u is Uniform(0, 1]
    t_over = log_z * math.exp(-log_n)  # log(Z)/N, may underflow to -0.0
    if t_over > -1e-8:
        # 1 - Z^(1/N) = -expm1(t) ~ -t; take logs before the underflow
        log_level = math.log(-log_z) - log_n
    else:
        log_level = math.log(-math.expm1(t_over))
    log_level -= math.log(beta)
    if log_level >= 0.0:
        return None  # required tail level >= 1: no mutant at all
    w = tail_quantile_log(tail, log_level)
    return w if w > 0.0 else None


def _top_order_statistics(
    log_m: float, tail: TailSpec, k: int, rng: np.random.Generator
) -> Tuple[List[float], float]:
    """Top k fitness order statistics of a cloud of exp(log_m) i.i.d. draws.

    Returns (descending fitness values, log of the tail level reached).
    Uses the sequential uniform-minimum representation in log space.
    """
    values: List[float] = []
    log_one_minus_level = 0.0  # log(1 - current level)
    log_level = 0.0
    for _ in range(k):
        u = rng.random()
        if u == 0.0:
            u = 2.0**-53
        # remaining cloud size ~ M - (rank); negligible correction at this scale
        log_one_minus_level += math.log(u) * math.exp(-log_m)
        if log_one_minus_level > -1e-8:
            log_level = math.log(-log_one_minus_level) if log_one_minus_level < 0.0 else -math.inf
        else:
            log_level = math.log(-math.expm1(log_one_minus_level))
        if log_level >= 0.0:
            break
        values.append(tail_quantile_log(tail, log_level))
    return values, (log_level if values else 0.0)


def _bulk_classes(
    log_m: float, log_top_level: float, tail: TailSpec, classes: int
) -> List[Tuple[float, LogReal]]:
    """Deterministic expected counts for the mutant cloud below the sampled
    order statistics, binned on a geometric grid of tail levels."""
    out: List[Tuple[float, LogReal]] = []
    if log_top_level >= 0.0:
        return out
    for j in range(classes):
        lo = log_top_level * (1.0 - j / classes)
        hi = log_top_level * (1.0 - (j + 1) / classes)  # hi level closer to 1
        # mass of levels in (exp(lo), exp(hi)]
        mass = math.exp(hi) - math.exp(lo)
        if mass <= 0.0:
            continue
        fitness = tail_quantile_log(tail, 0.5 * (lo + hi))
        if fitness <= 0.0:
            continue
        out.append((fitness, LogReal(log_m + math.log(mass))))
    return out


def step(pop: Population, params: ModelParams, rng: np.random.Generator) -> Population:
    """Advance one generation; extinction is absorbing."""
    if pop.extinct:
        return replace(pop, t=pop.t + 1, log_xi=-math.inf, w=0.0)
    beta = params.beta
    flags = set()
    merges = pop.merges

    rates = [(f, math.log(f) + c.log, c) for f, c in pop.families]
    log_lambda = log_sum(lg for _, lg, _ in rates)

    # non-mutant offspring per family
    fam: Dict[float, LogReal] = {}
    log_k_parts: List[float] = []
    for fitness, log_rate, count in rates:
        log_nm_rate = math.log1p(-beta) + log_rate
        exact = (
            count.log <= math.log(params.exact_cap)
            and log_nm_rate <= math.log(POISSON_MEAN_CAP)
        )
        if exact:
            k = int(rng.poisson(math.exp(log_nm_rate)))
            if k > 0:
                fam[fitness] = LogReal.from_float(k)
                log_k_parts.append(math.log(k))
        else:
            flags.add("family_deterministic")
            fam[fitness] = LogReal(log_nm_rate)
            log_k_parts.append(log_nm_rate)

    # mutant count
    log_mut_rate = math.log(beta) + log_lambda
    if log_mut_rate <= math.log(POISSON_MEAN_CAP):
        m_count: Union[int, LogReal] = int(rng.poisson(math.exp(log_mut_rate)))
        log_m = math.log(m_count) if m_count else -math.inf
    else:
        flags.add("mutants_deterministic")
        m_count = LogReal(log_mut_rate)
        log_m = log_mut_rate

    log_xi = log_sum(log_k_parts + ([log_m] if log_m != -math.inf else []))

    w_t = 0.0
    if params.variant == FMM:
        if isinstance(m_count, int):
            w = fittest_mutant(m_count, 1.0, params.tail, rng) if m_count else None
        else:
            w = fittest_mutant(m_count, 1.0, params.tail, rng)
        if w is not None:
            w_t = w
            fam[w] = fam[w] + LogReal.ONE if w in fam else LogReal.ONE
    else:  # MMM: the whole cloud joins
        if isinstance(m_count, int) and m_count <= params.mutant_sample_cap:
            if m_count:
                draws = sample_fitness(params.tail, rng, size=m_count)
                w_t = float(np.max(draws))
                for val in np.asarray(draws, dtype=float):
                    if val <= 0.0:
                        continue
                    lv = float(val)
                    fam[lv] = fam[lv] + LogReal.ONE if lv in fam else LogReal.ONE
        else:
            flags.add("mutant_cloud_binned")
            top, log_level = _top_order_statistics(log_m, params.tail, params.top_k, rng)
            if top:
                w_t = top[0]
            for val in top:
                if val > 0.0:
                    fam[val] = fam[val] + LogReal.ONE if val in fam else LogReal.ONE
            for fitness, cnt in _bulk_classes(log_m, log_level, params.tail, params.bulk_classes):
                fam[fitness] = fam[fitness] + cnt if fitness in fam else cnt

    # enforce the family cap by merging the lowest-fitness classes
    if len(fam) > params.family_cap:
        flags.add("families_merged")
        items = sorted(fam.items())
        excess = len(items) - params.family_cap + 1
        merged = items[:excess]
        log_c = log_sum(c.log for _, c in merged)
        log_fc = log_sum(math.log(f) + c.log for f, c in merged)
        agg_fitness = math.exp(log_fc - log_c)
        fam = dict(items[excess:])
        fam[agg_fitness] = fam.get(agg_fitness, LogReal.ZERO) + LogReal(log_c)
        merges += 1

    stats = _stats(fam)
    return Population(
        families=tuple(sorted(fam.items())),
        t=pop.t + 1,
        log_x=stats.log_x,
        log_xi=log_xi,
        w=w_t,
        q=stats.q,
        s_mean=stats.s_mean,
        sigma=stats.sigma,
        extinct=stats.log_x == -math.inf,
        merges=merges,
        approx_flags=tuple(sorted(set(pop.approx_flags) | flags)),
    )


@dataclass(frozen=True)
class TrajectoryRecord:
    t: int
    log_x: float
    log_xi: float
    w: float
    q: float
    s_mean: float
    sigma: float
    extinct: bool


@dataclass
class Trajectory:
    params: ModelParams
    initial: Tuple[Tuple[float, float], ...]
    records: List[TrajectoryRecord] = field(default_factory=list)
    termination: str = "horizon"
    approx_flags: Tuple[str, ...] = ()
    merges: int = 0

    def config_dict(self) -> dict:
        p = self.params
        return {
            "variant": p.variant,
            "beta": p.beta,
            "seed": p.seed,
            "family_cap": p.family_cap,
            "exact_cap": p.exact_cap,
            "tail": tail_to_config(p.tail),
            "initial": [list(pair) for pair in self.initial],
        }


def _record(pop: Population) -> TrajectoryRecord:
    return TrajectoryRecord(
        pop.t, pop.log_x, pop.log_xi, pop.w, pop.q, pop.s_mean, pop.sigma, pop.extinct
    )


def run(
    params: ModelParams,
    horizon: int,
    initial: Sequence[Tuple[float, float]] = ((1.0, 1),),
    max_log_x: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
) -> Trajectory:
    """Iterate generations until horizon, extinction, or the size cap.

    Bit-reproducible for a fixed seed: the stream is derived from
    ``params.seed`` unless an explicit generator is supplied.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(params.seed))
    pop = Population.initial(initial)
    traj = Trajectory(params=params, initial=tuple((f, float(c)) for f, c in initial))
    traj.records.append(_record(pop))
    for _ in range(horizon):
        pop = step(pop, params, rng)
        traj.records.append(_record(pop))
        if pop.extinct:
            traj.termination = "extinct"
            break
        if max_log_x is not None and pop.log_x > max_log_x:
            traj.termination = "size_cap"
            break
    traj.approx_flags = pop.approx_flags
    traj.merges = pop.merges
    return traj


@dataclass(frozen=True)
class SurvivalEstimate:
    estimate: float
    stderr: float
    ci95: Tuple[float, float]
    survivors: int
    replicas: int


def survival_probability(
    params: ModelParams,
    replicas: int,
    initial: Sequence[Tuple[float, float]] = ((1.0, 1),),
    horizon: int = 200,
    escape_margin: float = 10.0,
) -> SurvivalEstimate:
    """Fraction of replicas whose population escapes to the supercritical
    regime (log X above log(exact_cap) + margin) before dying out."""
    if replicas < 1:
        raise ValueError("need at least one replica")
    threshold = math.log(params.exact_cap) + escape_margin
    survivors = 0
    for rep in range(replicas):
        rng = np.random.default_rng(np.random.SeedSequence(params.seed, spawn_key=(rep,)))
        traj = run(params, horizon, initial=initial, max_log_x=threshold, rng=rng)
        last = traj.records[-1]
        if not last.extinct and last.log_x > threshold:
            survivors += 1
    p_hat = survivors / replicas
    se = math.sqrt(max(p_hat * (1.0 - p_hat), 1e-12) / replicas)
    ci = (max(0.0, p_hat - 1.96 * se), min(1.0, p_hat + 1.96 * se))
    return SurvivalEstimate(p_hat, se, ci, survivors, replicas)


_LOG10 = math.log(10.0)


def trajectory_to_csv(traj: Trajectory, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "log10_X", "log10_Xi", "W", "Q", "S", "sigma", "extinct"])
        for r in traj.records:
            writer.writerow(
                [
                    r.t,
                    repr(r.log_x / _LOG10),
                    repr(r.log_xi / _LOG10),
                    repr(r.w),
                    repr(r.q),
                    repr(r.s_mean),
                    repr(r.sigma),
                    int(r.extinct),
                ]
            )
