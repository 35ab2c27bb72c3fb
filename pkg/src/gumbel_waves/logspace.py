"""Log-space arithmetic for nonnegative quantities that overflow floats.

Population sizes in these models grow super-exponentially (values like
exp(t log t) at t = 1e6), so sizes are carried as natural logarithms with a
distinguished zero (log = -inf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Iterable, Union

__all__ = ["LogReal", "log_add", "log_sum"]


def log_add(a: float, b: float) -> float:
    """log(e^a + e^b) without overflow; -inf encodes zero."""
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def log_sum(values: Iterable[float]) -> float:
    """log of the sum of exp(values), compensated against cancellation."""
    vals = [v for v in values if v != -math.inf]
    if not vals:
        return -math.inf
    hi = max(vals)
    if hi == math.inf:
        return math.inf
    return hi + math.log(math.fsum(math.exp(v - hi) for v in vals))


@dataclass(frozen=True)
class LogReal:
    """A nonnegative extended real stored as its natural logarithm.

    Zero is log = -inf.  Supports addition, multiplication, powers and
    comparisons; converts back to float when the value fits.
    """

    log: float

    ZERO: ClassVar["LogReal"]  # assigned after the class definition
    ONE: ClassVar["LogReal"]

    @staticmethod
    def from_float(x: float) -> "LogReal":
        if x < 0:
            raise ValueError("LogReal encodes nonnegative values only")
        return LogReal(-math.inf if x == 0 else math.log(x))

    @staticmethod
    def from_log(lg: float) -> "LogReal":
        return LogReal(lg)

    @property
    def is_zero(self) -> bool:
        return self.log == -math.inf

    def to_float(self) -> float:
        """Value as float; overflows to inf past ~1e308."""
        if self.is_zero:
            return 0.0
        try:
            return math.exp(self.log)
        except OverflowError:
            return math.inf

    def to_count(self) -> int:
        """Round to the nearest integer; valid while the value is small."""
        x = self.to_float()
        if not math.isfinite(x):
            raise OverflowError("LogReal too large for an exact count")
        return round(x)

    @property
    def log10(self) -> float:
        return self.log / math.log(10.0)

    def __add__(self, other: "LogReal") -> "LogReal":
        return LogReal(log_add(self.log, other.log))

    def __mul__(self, other: Union["LogReal", float, int]) -> "LogReal":
        if isinstance(other, LogReal):
            if self.is_zero or other.is_zero:
                return LogReal(-math.inf)
            return LogReal(self.log + other.log)
        if other < 0:
            raise ValueError("LogReal scaling factor must be nonnegative")
        if other == 0 or self.is_zero:
            return LogReal(-math.inf)
        return LogReal(self.log + math.log(other))

    __rmul__ = __mul__

    def __truediv__(self, other: "LogReal") -> "LogReal":
        if other.is_zero:
            raise ZeroDivisionError("LogReal division by zero")
        if self.is_zero:
            return LogReal(-math.inf)
        return LogReal(self.log - other.log)

    def __pow__(self, exponent: float) -> "LogReal":
        if self.is_zero:
            if exponent <= 0:
                raise ValueError("0 ** nonpositive exponent")
            return LogReal(-math.inf)
        return LogReal(self.log * exponent)

    def __lt__(self, other: "LogReal") -> bool:
        return self.log < other.log

    def __le__(self, other: "LogReal") -> bool:
        return self.log <= other.log

    def __gt__(self, other: "LogReal") -> bool:
        return self.log > other.log

    def __ge__(self, other: "LogReal") -> bool:
        return self.log >= other.log

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"LogReal(log={self.log!r})"


LogReal.ZERO = LogReal(-math.inf)
LogReal.ONE = LogReal(0.0)
