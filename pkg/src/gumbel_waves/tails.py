"""Light-tailed fitness distributions and their growth/wave predictors.

Three tail families are supported, each defined through its tail function
G(x) = P(fitness > x):

* ``TypeI``   -- iterated-exponential decay: the n-fold log of 1/G equals
  ``x**alpha * L(x)`` for a slowly varying ``L``.
* ``TypeII``  -- log(1/G)/log(x) equals the same shape evaluated at the
  n-fold log of x.
* ``DiscreteStretched`` -- a discrete grid f_i = (c*i)**(1/alpha) with
  geometric masses, the grid used by the deterministic frequency recursion.

The asymptotic defining relations are adopted as exact identities on
``x >= x_min``; below ``x_min`` the tail is 1.  ``x_min`` is the smallest
point at which every iterated logarithm involved is positive, the identity
yields G <= 1, and G is nonincreasing from there on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

__all__ = [
    "TailDomainError",
    "SlowlyVarying",
    "TypeI",
    "TypeII",
    "DiscreteStretched",
    "TailSpec",
    "log_tail",
    "tail_quantile",
    "tail_quantile_log",
    "sample_fitness",
    "gaussian_cdf",
    "iterlog",
    "iterexp",
    "GrowthPrediction",
    "TypeIIPrediction",
    "predict",
    "fittest_scale",
    "wave_location",
    "wave_width",
    "chi_log",
    "u_envelope_log",
    "cal_g",
    "x_statistic",
    "w_statistic",
    "w_statistic_log",
    "statistic_targets",
    "tail_to_config",
    "tail_from_config",
]


class TailDomainError(ValueError):
    """Raised when a tail formula is evaluated outside its domain."""


def iterlog(x: float, n: int) -> float:
    """n-fold iterated logarithm; raises if an intermediate is <= 0."""
    v = float(x)
    for i in range(n):
        if v <= 0.0:
            raise TailDomainError(
                f"iterated log undefined: log^({i}) value {v!r} is not positive"
            )
        v = math.log(v)
    return v


def iterexp(x: float, n: int) -> float:
    """n-fold iterated exponential; saturates to +inf on overflow."""
    v = float(x)
    for _ in range(n):
        if v > 709.0:
            return math.inf
        v = math.exp(v)
    return v


def _iterlog_array(x: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    for _ in range(n):
        if np.any(v <= 0.0):
            raise TailDomainError("iterated log undefined for some array entries")
        v = np.log(v)
    return v


@dataclass(frozen=True)
class SlowlyVarying:
    """Product of powers of iterated logarithms, L(x) = prod (log^(k) x)**g_k.

    An empty factor list means L = 1.  Evaluation requires every involved
    iterated log to be strictly positive.
    """

    factors: Tuple[Tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        ks = [k for k, _ in self.factors]
        if any((not isinstance(k, int)) or k < 1 for k in ks):
            raise ValueError("slowly varying factor orders must be integers >= 1")
        if len(set(ks)) != len(ks):
            raise ValueError("slowly varying factor orders must be distinct")
        object.__setattr__(
            self, "factors", tuple((int(k), float(g)) for k, g in self.factors)
        )

    @property
    def is_one(self) -> bool:
        return not self.factors or all(g == 0.0 for _, g in self.factors)

    @property
    def min_x(self) -> float:
        """Exclusive lower domain edge: all log^(k) x > 0 above this point."""
        if not self.factors:
            return 0.0
        return max(iterexp(0.0, k) for k, _ in self.factors)

    def log_at(self, x: float) -> float:
        """log L(x)."""
        total = 0.0
        for k, g in self.factors:
            lk = iterlog(x, k)
            if lk <= 0.0:
                raise TailDomainError(f"log^({k})({x!r}) is not positive")
            total += g * math.log(lk)
        return total

    def log_at_array(self, x: np.ndarray) -> np.ndarray:
        total = np.zeros_like(np.asarray(x, dtype=float))
        for k, g in self.factors:
            lk = _iterlog_array(x, k)
            if np.any(lk <= 0.0):
                raise TailDomainError(f"log^({k}) not positive for some entries")
            total = total + g * np.log(lk)
        return total

    def dlog_dlogx(self, x: float) -> float:
        """d log L / d log x = sum_k g_k / (log x * ... * log^(k) x)."""
        total = 0.0
        for k, g in self.factors:
            prod = 1.0
            for j in range(1, k + 1):
                prod /= iterlog(x, j)
            total += g * prod
        return total

    def _neg_envelope(self, x: float) -> float:
        total = 0.0
        for k, g in self.factors:
            if g >= 0.0:
                continue
            prod = 1.0
            for j in range(1, k + 1):
                prod /= iterlog(x, j)
            total += -g * prod
        return total


class _ShapeFunction:
    """g(x) = x**alpha * L(x) restricted to where it is nonnegative and
    nondecreasing; shared by the type I and type II tails."""

    def __init__(self, alpha: float, sv: SlowlyVarying):
        self.alpha = float(alpha)
        self.sv = sv
        base = max(sv.min_x, 0.0)
        has_negative = any(g < 0.0 for _, g in sv.factors)
        if has_negative:
            self.x_min = self._monotone_edge(base)
            self.boundary_open = False
        else:
            self.x_min = base
            self.boundary_open = True

    def _monotone_edge(self, base: float) -> float:
        # smallest x with sum_{g_k<0} |g_k| prod (log^(j) x)^-1 <= alpha;
        # the envelope is decreasing, so bisection is safe.
        lo = base * (1.0 + 1e-12)
        hi = max(2.0 * base, base + 1.0)
        while self.sv._neg_envelope(hi) > self.alpha:
            hi *= 2.0
            if hi > 1e300:
                raise TailDomainError("no monotone region found for tail shape")
        if self.sv._neg_envelope(lo) <= self.alpha:
            return lo
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.sv._neg_envelope(mid) <= self.alpha:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-14 * max(1.0, hi):
                break
        return hi

    def value(self, x: float) -> float:
        if x < self.x_min:
            raise TailDomainError(f"shape function undefined below {self.x_min!r}")
        if self.boundary_open and x <= self.x_min:
            return 0.0  # continuous limit at the domain edge
        if x == 0.0:
            return 0.0
        return math.exp(self.alpha * math.log(x) + self.sv.log_at(x))

    def value_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(self.alpha * np.log(x) + self.sv.log_at_array(x))

    def solve(self, target: float) -> float:
        """x with g(x) = target (target > g(x_min)); monotone bisection."""
        if self.sv.is_one:
            return target ** (1.0 / self.alpha)
        log_target = math.log(target)

        def f(x: float) -> float:
            return self.alpha * math.log(x) + self.sv.log_at(x) - log_target

        lo = self.x_min + max(self.x_min, 1.0) * 1e-14
        if f(lo) >= 0.0:
            return lo
        hi = max(2.0 * lo, target ** (1.0 / self.alpha), 2.0)
        while f(hi) < 0.0:
            hi *= 2.0
            if hi > 1e300:
                raise TailDomainError("tail quantile bracket expansion failed")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if f(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        return hi


@dataclass(frozen=True)
class TypeI:
    """Tail with log^(n)(1/G(x)) = x**alpha * L(x) on x >= x_min."""

    n: int
    alpha: float
    sv: SlowlyVarying = field(default_factory=SlowlyVarying)

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError("tail index n must be an integer >= 1")
        if not (self.alpha > 0.0):
            raise ValueError("tail parameter alpha must be positive")
        object.__setattr__(self, "_shape", _ShapeFunction(self.alpha, self.sv))

    @property
    def x_min(self) -> float:
        return self._shape.x_min  # type: ignore[attr-defined]

    def log_tail(self, x: float) -> float:
        if x < self.x_min:
            return 0.0
        shape: _ShapeFunction = self._shape  # type: ignore[attr-defined]
        g = shape.value(x)
        return -iterexp(g, self.n - 1)

    def quantile_log(self, log_p: float) -> float:
        if log_p > 0.0:
            raise ValueError("log probability must be <= 0")
        if log_p >= self.log_tail(self.x_min):
            return self.x_min
        shape: _ShapeFunction = self._shape  # type: ignore[attr-defined]
        target = iterlog(-log_p, self.n - 1)
        return shape.solve(target)

    def _quantile_log_array(self, log_p: np.ndarray) -> np.ndarray:
        shape: _ShapeFunction = self._shape  # type: ignore[attr-defined]
        lp = np.asarray(log_p, dtype=float)
        out = np.full(lp.shape, self.x_min, dtype=float)
        mask = lp < self.log_tail(self.x_min)
        if np.any(mask):
            if self.sv.is_one:
                target = _iterlog_array(-lp[mask], self.n - 1)
                out[mask] = target ** (1.0 / self.alpha)
            else:
                out[mask] = [self.quantile_log(v) for v in lp[mask]]
        return out


@dataclass(frozen=True)
class TypeII:
    """Tail with log(1/G(x))/log(x) = g(log^(n) x) where g(y) = y**alpha L(y)."""

    n: int
    alpha: float
    sv: SlowlyVarying = field(default_factory=SlowlyVarying)

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError("tail index n must be an integer >= 1")
        if not (self.alpha > 0.0):
            raise ValueError("tail parameter alpha must be positive")
        shape = _ShapeFunction(self.alpha, self.sv)
        object.__setattr__(self, "_shape", shape)
        # need log x > 0 and log^(n) x above the shape's own domain edge
        edge = iterexp(shape.x_min, self.n) if shape.x_min > 0.0 else iterexp(0.0, self.n)
        object.__setattr__(self, "_x_min", max(edge, 1.0))

    @property
    def x_min(self) -> float:
        return self._x_min  # type: ignore[attr-defined]

    def log_tail(self, x: float) -> float:
        if x <= self.x_min:
            return 0.0 if x < self.x_min else self._log_tail_inner(self.x_min)
        return self._log_tail_inner(x)

    def _log_tail_inner(self, x: float) -> float:
        shape: _ShapeFunction = self._shape  # type: ignore[attr-defined]
        y = iterlog(x, self.n)
        if y < shape.x_min or (shape.boundary_open and y <= shape.x_min):
            return 0.0
        return -math.log(x) * shape.value(y)

    def quantile_log(self, log_p: float) -> float:
        if log_p > 0.0:
            raise ValueError("log probability must be <= 0")
        if log_p >= self.log_tail(self.x_min):
            return self.x_min
        shape: _ShapeFunction = self._shape  # type: ignore[attr-defined]
        target = -log_p

        def f(s: float) -> float:
            # s = log x; -log G = s * g(log^(n-1) s)
            return s * shape.value(iterlog(s, self.n - 1)) - target

        lo = math.log(self.x_min) * (1.0 + 1e-14) + 1e-300
        if f(lo) >= 0.0:
            return self.x_min
        hi = max(2.0 * lo, 2.0)
        while f(hi) < 0.0:
            hi *= 2.0
            if hi > 700.0 and f(700.0) < 0.0:
                raise TailDomainError(
                    "type II quantile exceeds the float range; the requested "
                    f"tail level log_p={log_p!r} maps to fitness above exp(700)"
                )
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if f(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        return math.exp(hi)


@dataclass(frozen=True)
class DiscreteStretched:
    """Discrete grid f_i = (c*i)**(1/alpha), P(F = f_i) = e^{-c i}(e^c - 1)."""

    alpha: float
    c: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0):
            raise ValueError("tail parameter alpha must be positive")
        if not (self.c > 0.0):
            raise ValueError("grid constant c must be positive")

    def grid_point(self, i: int) -> float:
        if i < 1:
            raise ValueError("grid index must be >= 1")
        return (self.c * i) ** (1.0 / self.alpha)

    def log_mass(self, i: int) -> float:
        """log P(F = f_i)."""
        if i < 1:
            raise ValueError("grid index must be >= 1")
        return -self.c * i + math.log(math.expm1(self.c))

    @property
    def x_min(self) -> float:
        return self.grid_point(1)

    def grid_index(self, x: float) -> int:
        """Largest i with f_i <= x (0 if below the grid)."""
        if x < 0.0 or x < self.x_min:
            return 0
        i = int(math.floor(x ** self.alpha / self.c))
        # anchor against float rounding at the grid points themselves
        while i >= 1 and self.grid_point(i) > x:
            i -= 1
        while self.grid_point(i + 1) <= x:
            i += 1
        return i

    def log_tail(self, x: float) -> float:
        i = self.grid_index(x)
        return 0.0 if i < 1 else -self.c * float(i)

    def quantile_log(self, log_p: float) -> float:
        if log_p > 0.0:
            raise ValueError("log probability must be <= 0")
        r = -log_p / self.c
        i = max(1, int(math.ceil(r - 1e-12)))
        return self.grid_point(i)

    def _quantile_log_array(self, log_p: np.ndarray) -> np.ndarray:
        r = -np.asarray(log_p, dtype=float) / self.c
        i = np.maximum(1, np.ceil(r - 1e-12))
        return (self.c * i) ** (1.0 / self.alpha)


TailSpec = Union[TypeI, TypeII, DiscreteStretched]


def log_tail(spec: TailSpec, x: float) -> float:
    """log G(x); 0 below the support minimum, -inf allowed."""
    return spec.log_tail(x)


def tail_quantile_log(spec: TailSpec, log_p: float) -> float:
    """inf{x : G(x) <= p} for p given as log p (supports astronomically
    small levels)."""
    return spec.quantile_log(log_p)


def tail_quantile(spec: TailSpec, p: float) -> float:
    """inf{x : G(x) <= p} for p in (0, 1]."""
    if not (0.0 < p <= 1.0):
        raise ValueError("probability must lie in (0, 1]")
    return spec.quantile_log(math.log(p))


def sample_fitness(spec: TailSpec, rng: np.random.Generator, size: Optional[int] = None):
    """Inverse-transform sample(s) from the fitness distribution.

    Consumes one uniform u per sample and returns the quantile at level u
    (u = 0, a measure-zero draw, maps to level 1).
    """
    if size is None:
        u = rng.random()
        return spec.quantile_log(math.log(u) if u > 0.0 else 0.0)
    u = rng.random(size)
    lp = np.where(u > 0.0, np.log(np.where(u > 0.0, u, 1.0)), 0.0)
    if isinstance(spec, (DiscreteStretched, TypeI)):
        return spec._quantile_log_array(lp)
    return np.array([spec.quantile_log(v) for v in lp])


_SQRT2 = math.sqrt(2.0)


def gaussian_cdf(y: float) -> float:
    """Standard normal CDF."""
    if y == math.inf:
        return 1.0
    if y == -math.inf:
        return 0.0
    return 0.5 * math.erfc(-y / _SQRT2)


# ---------------------------------------------------------------------------
# Closed-form predictors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthPrediction:
    """Type I predictors at generation t.

    ``u`` is the fittest-mutant scale, ``v`` the wave location, ``s`` the
    wave width; ``log_x_scale`` normalizes log X(t) so that the normalized
    statistic tends to ``exponent_target``.
    """

    t: float
    u: float
    v: float
    s: float
    log_x_scale: float
    exponent_target: float


@dataclass(frozen=True)
class TypeIIPrediction:
    """Type II normalizer targets at generation t.

    The growth statistics are ratios of iterated logs (see
    :func:`x_statistic` / :func:`w_statistic`); ``log_w_scale`` is the
    heuristic fittest-mutant scale in log space.
    """

    t: float
    n: int
    alpha: float
    x_target: float
    w_target: float
    log_w_scale: float


def _omega_log(spec: TypeI, y: float) -> float:
    """log of the slowly varying correction in the fittest-mutant scale."""
    n, alpha, sv = spec.n, spec.alpha, spec.sv
    out = 0.0
    if n == 1:
        ly = math.log(y)
        if ly <= 0.0 or ly / alpha <= 0.0:
            raise TailDomainError("fittest-mutant scale needs log t > alpha-threshold")
        out += (1.0 / alpha) * math.log(ly / alpha)
    if not sv.is_one:
        out -= (1.0 / alpha) * sv.log_at(y ** (1.0 / alpha))
    return out


def fittest_scale(spec: TypeI, t: float) -> float:
    """u_n(t), the scale of the largest mutant fitness at generation t."""
    y = iterlog(t, spec.n - 1)
    if y <= 0.0:
        raise TailDomainError("generation too small for the fittest-mutant scale")
    return math.exp(math.log(y) / spec.alpha + _omega_log(spec, y))


def wave_location(spec: TypeI, t: float) -> float:
    """v_n(t), the predicted center of the fitness wave."""
    n, alpha, sv = spec.n, spec.alpha, spec.sv
    y = iterlog(t, n - 1)
    if y <= 0.0:
        raise TailDomainError("generation too small for the wave location")
    out = math.log(y) / alpha
    if n == 1:
        out -= math.log(alpha) / alpha
    if not sv.is_one:
        out += sv.log_at(y ** (1.0 / alpha))
    return math.exp(out)


def wave_width(spec: TypeI, t: float) -> float:
    """s_n(t) = v_n(t)/sqrt(alpha t) * prod_{k<n} (log^(k) t)^(-1/2)."""
    v = wave_location(spec, t)
    out = v / math.sqrt(spec.alpha * t)
    for k in range(1, spec.n):
        out /= math.sqrt(iterlog(t, k))
    return out


def predict(spec: TailSpec, t: float):
    """Closed-form growth/wave predictors at generation t.

    Type I returns a :class:`GrowthPrediction`; type II returns a
    :class:`TypeIIPrediction` (its raw scales overflow floats, so they are
    reported via normalized statistics and log scales).
    """
    if isinstance(spec, TypeII):
        n, alpha = spec.n, spec.alpha
        if n == 1:
            x_target, w_target = 1.0 + 1.0 / alpha, 1.0 / alpha
            log_w = t ** (1.0 / alpha)
        elif n == 2:
            x_target = w_target = 1.0 / (1.0 + alpha)
            log_w = t ** (-alpha / (1.0 + alpha)) * math.exp(t ** (1.0 / (1.0 + alpha)))
        else:
            x_target = w_target = -alpha
            ln2 = iterlog(t, n - 2)
            log_w = ln2 ** (-alpha) * math.exp(t * ln2 ** (-alpha))
        return TypeIIPrediction(t, n, alpha, x_target, w_target, log_w)
    if isinstance(spec, DiscreteStretched):
        # the grid realizes log(1/G) ~ x**alpha, so the n=1 type I
        # predictors apply with L = 1
        spec = TypeI(1, spec.alpha)
    u = fittest_scale(spec, t)
    v = wave_location(spec, t)
    s = wave_width(spec, t)
    scale = t * iterlog(t, spec.n)
    pred = GrowthPrediction(t, u, v, s, scale, 1.0 / spec.alpha)
    for name in ("u", "v", "s", "log_x_scale"):
        val = getattr(pred, name)
        if not (math.isfinite(val) and val > 0.0):
            raise TailDomainError(f"predictor {name} not finite/positive at t={t!r}")
    return pred


def chi_log(t: float, n: int, nu: float) -> float:
    """log of the type II growth envelope chi(t, n, nu)."""
    if n == 1:
        return nu * math.log(t)
    if n == 2:
        return t ** nu
    return t * iterlog(t, n - 2) ** (-nu)


def u_envelope_log(t: float, n: int, nu: float, a: float) -> float:
    """log of the type II fittest-mutant envelope U(t, n, nu, a)."""
    return chi_log(t, n, nu) - a * math.log(iterlog(t, max(0, n - 2)))


def cal_g(x: float, n: int, a: float) -> float:
    """log(x) * (log^(n) x)**a, the tail-decay comparison functional."""
    return math.log(x) * iterlog(x, n) ** a


def statistic_targets(spec: TailSpec) -> Tuple[float, float]:
    """(x_target, w_target): limits of the normalized growth statistics."""
    if isinstance(spec, (TypeI, DiscreteStretched)):
        return 1.0 / spec.alpha, 1.0
    n, alpha = spec.n, spec.alpha
    if n == 1:
        return 1.0 + 1.0 / alpha, 1.0 / alpha
    if n == 2:
        return 1.0 / (1.0 + alpha), 1.0 / (1.0 + alpha)
    return -alpha, -alpha


def x_statistic(spec: TailSpec, t: float, log_x: float) -> float:
    """Normalized population-growth statistic whose limit is x_target."""
    if isinstance(spec, DiscreteStretched):
        scale = t * math.log(t)
        if scale <= 0.0:
            raise TailDomainError("growth normalizer undefined this early")
        return log_x / scale
    if isinstance(spec, TypeI):
        scale = t * iterlog(t, spec.n)
        if scale <= 0.0:
            raise TailDomainError("growth normalizer undefined this early")
        return log_x / scale
    n = spec.n
    if n == 1:
        return math.log(log_x) / math.log(t)
    if n == 2:
        return math.log(math.log(log_x)) / math.log(t)
    return (math.log(math.log(log_x)) - math.log(t)) / iterlog(t, n - 1)


def w_statistic(spec: TailSpec, t: float, w: float) -> float:
    """Normalized fittest-mutant statistic whose limit is w_target."""
    return w_statistic_log(spec, t, math.log(w))


def w_statistic_log(spec: TailSpec, t: float, log_w: float) -> float:
    """Same as :func:`w_statistic`, for fitness given in log scale (type II
    fitness overflows floats already at moderate generations)."""
    if isinstance(spec, DiscreteStretched):
        return math.exp(log_w) / fittest_scale(TypeI(1, spec.alpha), t)
    if isinstance(spec, TypeI):
        return math.exp(log_w) / fittest_scale(spec, t)
    n = spec.n
    if n == 1:
        return math.log(log_w) / math.log(t)
    if n == 2:
        return math.log(math.log(log_w)) / math.log(t)
    return (math.log(math.log(log_w)) - math.log(t)) / iterlog(t, n - 1)


# ---------------------------------------------------------------------------
# Plain-text config blocks
# ---------------------------------------------------------------------------

_VARIANT_NAMES = {"type1": TypeI, "type2": TypeII, "discrete": DiscreteStretched}


def tail_to_config(spec: TailSpec) -> str:
    """Serialize to a flat key=value block with exact decimal round-trip."""
    if isinstance(spec, DiscreteStretched):
        return f"tail = discrete\nalpha = {spec.alpha!r}\nc = {spec.c!r}\n"
    name = "type1" if isinstance(spec, TypeI) else "type2"
    lines = [f"tail = {name}", f"n = {spec.n}", f"alpha = {spec.alpha!r}"]
    factors = " ".join(f"{k}:{g!r}" for k, g in spec.sv.factors)
    lines.append(f"L = {factors}")
    return "\n".join(lines) + "\n"


def _parse_factors(text: str) -> SlowlyVarying:
    factors = []
    for token in text.split():
        k, _, g = token.partition(":")
        factors.append((int(k), float(g)))
    return SlowlyVarying(tuple(factors))


def tail_from_config(text: str) -> TailSpec:
    """Parse a tail spec from the key=value block written by tail_to_config."""
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("["):
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ValueError(f"malformed tail config line: {line!r}")
        fields[key.strip()] = value.strip()
    return tail_from_fields(fields)


def tail_from_fields(fields: dict) -> TailSpec:
    variant = fields.get("tail")
    if variant not in _VARIANT_NAMES:
        raise ValueError(f"unknown tail variant {variant!r}")
    if variant == "discrete":
        return DiscreteStretched(alpha=float(fields["alpha"]), c=float(fields["c"]))
    sv = _parse_factors(fields.get("L", ""))
    cls = _VARIANT_NAMES[variant]
    return cls(n=int(fields.get("n", 1)), alpha=float(fields["alpha"]), sv=sv)
