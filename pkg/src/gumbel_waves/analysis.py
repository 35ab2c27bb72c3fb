"""Empirical fitness distributions and the estimators that confront
simulation output with the closed-form predictors: standardized waves,
sup-norm distances to the normal CDF, growth-exponent ratios and
width-exponent fits.  Loaders at the bottom consume the CSV schemas the
simulators emit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .logspace import log_sum
from .tails import TailSpec, gaussian_cdf, statistic_targets, w_statistic, x_statistic

__all__ = [
    "Efd",
    "efd_from_population",
    "efd_from_weighted",
    "StandardizedWave",
    "standardized_wave",
    "standardized_density",
    "ks_to_gaussian",
    "growth_exponents",
    "width_exponent",
    "Verdict",
    "verdicts_to_json",
    "TrajectoryRow",
    "load_trajectory_csv",
    "load_profile_csv",
]


@dataclass(frozen=True)
class Efd:
    """Cumulative fitness distribution: sorted support and cumulative
    weights ending at 1.  An empty population is the constant-1 CDF with
    zero mean and width."""

    fitness: np.ndarray
    cum: np.ndarray
    s_mean: float
    sigma: float
    source: str = ""

    @property
    def empty(self) -> bool:
        return len(self.fitness) == 0

    def psi_at(self, f: float) -> float:
        if self.empty:
            return 1.0
        idx = int(np.searchsorted(self.fitness, f, side="right")) - 1
        return 0.0 if idx < 0 else float(self.cum[idx])

    def psi_left_at(self, f: float) -> float:
        """Left limit of the CDF at f."""
        if self.empty:
            return 1.0
        idx = int(np.searchsorted(self.fitness, f, side="left")) - 1
        return 0.0 if idx < 0 else float(self.cum[idx])


def efd_from_weighted(
    fitness: Sequence[float], log_weights: Sequence[float], source: str = ""
) -> Efd:
    """Build the distribution from (fitness, log weight) pairs."""
    f = np.asarray(fitness, dtype=float)
    lw = np.asarray(log_weights, dtype=float)
    keep = lw > -math.inf
    f, lw = f[keep], lw[keep]
    if len(f) == 0:
        return Efd(np.empty(0), np.empty(0), 0.0, 0.0, source)
    order = np.argsort(f, kind="stable")
    f, lw = f[order], lw[order]
    total = log_sum(lw.tolist())
    w = np.exp(lw - total)
    cum = np.cumsum(w)
    cum[-1] = 1.0
    s_mean = float(math.fsum(w * f))
    var = float(math.fsum(w * (f - s_mean) ** 2))
    return Efd(f, cum, s_mean, math.sqrt(max(var, 0.0)), source)


def efd_from_population(obj) -> Efd:
    """Adapt any of the model outputs to an Efd.

    Accepts the stochastic engine's Population, the deterministic
    WaveProfile, an SfmmSnapshot, or a frequency-recursion state.
    """
    from .dfmm import WaveProfile
    from .engine import Population
    from .qmm import FrequencyState
    from .sfmm import SfmmSnapshot

    if isinstance(obj, Population):
        if obj.extinct or not obj.families:
            return Efd(np.empty(0), np.empty(0), 0.0, 0.0, "engine")
        fitness = [f for f, _ in obj.families]
        logw = [c.log for _, c in obj.families]
        return efd_from_weighted(fitness, logw, "engine")
    if isinstance(obj, WaveProfile):
        return Efd(obj.fitness, obj.phi, obj.s_mean, obj.sigma, "dfmm")
    if isinstance(obj, SfmmSnapshot):
        return Efd(obj.fitness, obj.psi, obj.s_mean, obj.sigma, "sfmm")
    if isinstance(obj, FrequencyState):
        raise TypeError("pass (state, cfg) through efd_from_frequencies instead")
    raise TypeError(f"no fitness distribution adapter for {type(obj)!r}")


def efd_from_frequencies(state, cfg) -> Efd:
    """Efd of a frequency-recursion state on its fitness grid."""
    k = state.indices.astype(float)
    fitness = cfg.grid_fitness(k)
    return efd_from_weighted(fitness, state.log_psi, "qmm")


DEFAULT_Y_GRID = np.round(np.arange(-80, 81) * 0.05, 10)


@dataclass(frozen=True)
class StandardizedWave:
    """CDF values on a y-grid after centering by v and scaling by s."""

    y: np.ndarray
    values: np.ndarray
    left_values: np.ndarray
    v: float
    s: float


def standardized_wave(efd: Efd, v: float, s: float, y_grid: Optional[np.ndarray] = None) -> StandardizedWave:
    if not (s > 0.0):
        raise ValueError("standardization width must be positive")
    y = DEFAULT_Y_GRID if y_grid is None else np.asarray(y_grid, dtype=float)
    vals = np.array([efd.psi_at(v + s * yy) for yy in y])
    lefts = np.array([efd.psi_left_at(v + s * yy) for yy in y])
    return StandardizedWave(y, vals, lefts, v, s)


def ks_to_gaussian(wave: StandardizedWave) -> float:
    """sup over the grid of |Psi(v + s y) - Upsilon(y)|, using both
    one-sided limits of the step function."""
    targets = np.array([gaussian_cdf(yy) for yy in wave.y])
    d_right = np.max(np.abs(wave.values - targets))
    d_left = np.max(np.abs(wave.left_values - targets))
    return float(max(d_right, d_left))


def standardized_density(
    fitness: np.ndarray,
    dens: np.ndarray,
    s_mean: float,
    sigma: float,
    y_grid: np.ndarray,
) -> np.ndarray:
    """sigma * psi(s_mean + sigma*y) by linear interpolation of a binned
    density given at grid centers (0 outside the covered range)."""
    if not (sigma > 0.0):
        raise ValueError("standardization width must be positive")
    targets = s_mean + sigma * np.asarray(y_grid, dtype=float)
    vals = np.interp(targets, np.asarray(fitness), np.asarray(dens), left=0.0, right=0.0)
    return sigma * vals


@dataclass(frozen=True)
class GrowthRow:
    t: float
    x_stat: float
    x_target: float
    w_stat: Optional[float]
    w_target: float


def growth_exponents(
    rows: Iterable[Tuple[float, float, Optional[float]]], spec: TailSpec
) -> List[GrowthRow]:
    """Normalized growth statistics for (t, log X, W) rows.

    W may be None (deterministic size series); the corresponding statistic
    is omitted.  Rows with undefined normalizers (too-early t) are skipped.
    """
    x_target, w_target = statistic_targets(spec)
    out: List[GrowthRow] = []
    for t, log_x, w in rows:
        try:
            xs = x_statistic(spec, t, log_x)
            ws = w_statistic(spec, t, w) if w is not None and w > 0.0 else None
        except (ValueError, OverflowError):
            continue
        out.append(GrowthRow(t, xs, x_target, ws, w_target))
    return out


def width_exponent(
    points: Sequence[Tuple[float, float]], burn_in: float = 0.1
) -> Tuple[float, float]:
    """Least-squares slope of log sigma vs log t with its standard error.

    Drops the first ``burn_in`` fraction of the (logarithmic) time range,
    since the limits are reached as t grows; requires at least 10 points
    spanning a decade after that.
    """
    pts = [(t, s) for t, s in points if t > 0.0 and s > 0.0]
    if pts and burn_in > 0.0:
        l_lo = math.log(min(t for t, _ in pts))
        l_hi = math.log(max(t for t, _ in pts))
        cut = math.exp(l_lo + burn_in * (l_hi - l_lo))
        pts = [(t, s) for t, s in pts if t >= cut * (1.0 - 1e-12)]
    if len(pts) < 10:
        raise ValueError("need at least 10 usable (t, sigma) points")
    ts = np.array([t for t, _ in pts])
    if np.max(ts) / np.min(ts) < 10.0 * (1.0 - 1e-12):
        raise ValueError("time points must span at least one decade")
    x = np.log(ts)
    y = np.log(np.array([s for _, s in pts]))
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - ym - slope * (x - xm)
    dof = max(n - 2, 1)
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
    return slope, stderr


@dataclass(frozen=True)
class Verdict:
    statistic: str
    value: float
    target: float
    tolerance: float
    passed: bool
    note: str = ""

    @staticmethod
    def check(statistic: str, value: float, target: float, tolerance: float, note: str = "") -> "Verdict":
        return Verdict(statistic, value, target, tolerance, abs(value - target) <= tolerance, note)


# ---------------------------------------------------------------------------
# CSV loaders for the simulators' documented schemas
# ---------------------------------------------------------------------------

_LOG10 = math.log(10.0)


@dataclass(frozen=True)
class TrajectoryRow:
    t: int
    log_x: float  # natural log
    log_xi: float
    w: float
    q: float
    s_mean: float
    sigma: float
    extinct: bool


def load_trajectory_csv(path: str) -> List[TrajectoryRow]:
    """Rows of a stochastic-run CSV (t, log10_X, log10_Xi, W, Q, S, sigma,
    extinct), with sizes converted back to natural logs."""
    out: List[TrajectoryRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "log10_X", "log10_Xi", "W", "Q", "S", "sigma", "extinct"]:
            raise ValueError(f"{path}: unexpected trajectory header {header!r}")
        for row in reader:
            out.append(
                TrajectoryRow(
                    int(row[0]),
                    float(row[1]) * _LOG10,
                    float(row[2]) * _LOG10,
                    float(row[3]),
                    float(row[4]),
                    float(row[5]),
                    float(row[6]),
                    bool(int(row[7])),
                )
            )
    return out


def load_profile_csv(path: str, source: str = "") -> Efd:
    """A cumulative profile CSV (f, Phi) as an Efd; the mean/width are
    recomputed from the implied weights."""
    fs: List[float] = []
    cum: List[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["f", "Phi"]:
            raise ValueError(f"{path}: unexpected profile header {header!r}")
        for row in reader:
            fs.append(float(row[0]))
            cum.append(float(row[1]))
    if not fs:
        return Efd(np.empty(0), np.empty(0), 0.0, 0.0, source)
    f = np.asarray(fs)
    c = np.asarray(cum)
    w = np.diff(np.concatenate([[0.0], c]))
    w = np.maximum(w, 0.0)
    total = w.sum()
    if total <= 0.0:
        raise ValueError(f"{path}: profile carries no mass")
    w /= total
    s_mean = float(np.dot(w, f))
    var = float(np.dot(w, (f - s_mean) ** 2))
    return Efd(f, c, s_mean, math.sqrt(max(var, 0.0)), source)


def verdicts_to_json(verdicts: Sequence[Verdict], path: str) -> None:
    payload = [
        {
            "statistic": v.statistic,
            "value": v.value,
            "target": v.target,
            "tolerance": v.tolerance,
            "pass": v.passed,
            "note": v.note,
        }
        for v in verdicts
    ]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
