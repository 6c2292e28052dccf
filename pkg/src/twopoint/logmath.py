"""Natural-log helpers for huge combinatorial quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

NEG_INF = -math.inf

# Up to this many factors, ln C(n, k) is summed term by term.  This keeps
# full precision for huge n (math.log is exact-ish on Python ints) and avoids
# lgamma cancellation; beyond it lgamma is accurate enough.
_DIRECT_SUM_MAX = 1000


def log_binom(n: int, k: int) -> float:
    """ln C(n, k) for integers; -inf when k is outside [0, n]."""
    if k < 0 or k > n:
        return NEG_INF
    k = min(k, n - k)
    if k == 0:
        return 0.0
    if k <= _DIRECT_SUM_MAX or n > 2**53:
        return math.fsum(math.log(n - i) for i in range(k)) - math.lgamma(k + 1)
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def logsumexp(values: Iterable[float]) -> float:
    vals = [v for v in values if v != NEG_INF]
    if not vals:
        return NEG_INF
    top = max(vals)
    if math.isinf(top):
        return top
    return top + math.log(math.fsum(math.exp(v - top) for v in vals))


def choose2(k: float) -> float:
    """k(k-1)/2, also for real k."""
    return k * (k - 1) / 2


@dataclass(frozen=True)
class LogValue:
    """A real number carried as (sign, ln|x|)."""

    ln_mag: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if self.sign == 0 and self.ln_mag != NEG_INF:
            object.__setattr__(self, "ln_mag", NEG_INF)
        if self.sign != 0 and self.ln_mag == NEG_INF:
            object.__setattr__(self, "sign", 0)

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(NEG_INF, 0)

    @classmethod
    def from_float(cls, x: float) -> "LogValue":
        if x == 0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.ln_mag)

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0 or other.sign == 0:
            return LogValue.zero()
        return LogValue(self.ln_mag + other.ln_mag, self.sign * other.sign)

    def __float__(self) -> float:
        return self.value
