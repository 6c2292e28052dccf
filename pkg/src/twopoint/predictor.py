"""Concentration windows and log-domain expectations for G(n, p).

Every window here is a pair ``{lo, lo + 1}``.  Logarithms are natural unless a
name says otherwise; ``q_log = ln(1/(1-p))`` is the recurring base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .errors import BracketError, DomainError, ScanRangeError
from .logmath import LogValue, choose2, log_binom

DEFAULT_TREE_EPS = 0.45
DEFAULT_EPS1 = 0.1
BISECTION_TOL = 1e-9
BISECTION_MAX_ITER = 200

CLOSED_FORM = "closed_form"
ROOT_BASED = "root_based"
MOMENT_BASED = "moment_based"
WINDOW_METHODS = (CLOSED_FORM, ROOT_BASED, MOMENT_BASED)


@dataclass(frozen=True)
class ModelParams:
    n: int
    p: float
    q_log: float = field(init=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise DomainError(f"n={self.n} must be an integer >= 3")
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p={self.p} must lie in (0, 1)")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "q_log", -math.log1p(-self.p))

    @property
    def ln_n(self) -> float:
        return math.log(self.n)

    def log_q(self, x: float) -> float:
        """Logarithm base 1/(1-p)."""
        return math.log(x) / self.q_log


@dataclass(frozen=True)
class PredictionWindow:
    lo: int
    hi: int
    method: str

    def __post_init__(self):
        if self.hi != self.lo + 1:
            raise DomainError(f"window must be consecutive, got {{{self.lo}, {self.hi}}}")
        if self.method not in WINDOW_METHODS:
            raise DomainError(f"unknown window method {self.method!r}")

    @classmethod
    def at(cls, lo: int, method: str) -> "PredictionWindow":
        return cls(int(lo), int(lo) + 1, method)

    def __contains__(self, value: int) -> bool:
        return value == self.lo or value == self.hi

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "method": self.method}


T_FORMS = ("constant", "power", "table")


@dataclass(frozen=True)
class EdgeBudgetFn:
    """The edge budget t(k).

    ``constant``: t(k) = c.  ``power``: t(k) = floor(c * k**a).  ``table``:
    explicit values keyed by k.  ``R`` and ``eps`` are the smoothness and
    density constants the sequence is checked against.
    """

    form: str = "constant"
    c: float = 0.0
    a: float = 0.0
    table: Mapping[int, int] | None = None
    R: float = 1.0
    eps: float = 0.5

    def __post_init__(self):
        if self.form not in T_FORMS:
            raise DomainError(f"unknown t-form {self.form!r}")
        if self.c < 0 or self.a < 0:
            raise DomainError("t-form parameters must be non-negative")
        if self.form == "constant" and int(self.c) != self.c:
            raise DomainError("constant t must be an integer")
        if self.form == "table":
            if not self.table:
                raise DomainError("table t-form needs values")
            object.__setattr__(self, "table", {int(k): int(v) for k, v in self.table.items()})
        if self.R <= 0 or self.eps <= 0:
            raise DomainError("R and eps must be positive")

    @classmethod
    def constant(cls, c: int, **kw) -> "EdgeBudgetFn":
        return cls("constant", c=c, **kw)

    @classmethod
    def power(cls, c: float, a: float = 2.0, **kw) -> "EdgeBudgetFn":
        return cls("power", c=c, a=a, **kw)

    @classmethod
    def from_table(cls, table: Mapping[int, int], **kw) -> "EdgeBudgetFn":
        return cls("table", table=table, **kw)

    def __call__(self, k: int) -> int:
        if self.form == "constant":
            return int(self.c)
        if self.form == "power":
            if float(self.a).is_integer():
                # exact decimal arithmetic so that e.g. 0.005 * 400 floors to 2
                return math.floor(Fraction(repr(float(self.c))) * k ** int(self.a))
            return math.floor(self.c * k**self.a)
        try:
            return self.table[k]
        except KeyError:
            raise DomainError(f"t({k}) not in table") from None

    def phi(self, k: int) -> float:
        """k^2 / t(k); infinite when t(k) = 0."""
        t = self(k)
        return math.inf if t == 0 else k * k / t

    def to_dict(self) -> dict:
        d = {"form": self.form, "R": self.R, "eps": self.eps}
        if self.form == "table":
            d["table"] = {str(k): v for k, v in sorted(self.table.items())}
        else:
            d["c"] = self.c
            if self.form == "power":
                d["a"] = self.a
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "EdgeBudgetFn":
        form = d.get("form", "constant")
        kw = {k: d[k] for k in ("R", "eps") if k in d}
        if form == "table":
            return cls.from_table({int(k): v for k, v in d["table"].items()}, **kw)
        if form == "power":
            return cls.power(d["c"], d.get("a", 2.0), **kw)
        return cls.constant(d.get("c", 0), **kw)


# ---------------------------------------------------------------- expectations

def log_expected_tree_count(mp: ModelParams, k: int) -> LogValue:
    """ln E[# induced k-vertex trees] = ln[C(n,k) (1-p)^(C(k,2)-k+1) p^(k-1) k^(k-2)]."""
    if not 1 <= k <= mp.n:
        raise DomainError(f"k={k} outside [1, {mp.n}]")
    ln = (
        log_binom(mp.n, k)
        + (choose2(k) - k + 1) * math.log1p(-mp.p)
        + (k - 1) * math.log(mp.p)
        + (k - 2) * math.log(k)
    )
    return LogValue(ln)


def log_expected_path_count(mp: ModelParams, k: int) -> LogValue:
    """ln E[# induced paths on k vertices]; k!/2 labelings for k >= 2."""
    if not 1 <= k <= mp.n:
        raise DomainError(f"k={k} outside [1, {mp.n}]")
    if k == 1:
        return LogValue(math.log(mp.n))
    ln = (
        log_binom(mp.n, k)
        + math.lgamma(k + 1) - math.log(2)
        + (k - 1) * math.log(mp.p)
        + (choose2(k) - k + 1) * math.log1p(-mp.p)
    )
    return LogValue(ln)


def log_expected_cycle_count(mp: ModelParams, k: int) -> LogValue:
    """ln E[# induced cycles on k >= 3 vertices]; (k-1)!/2 labelings."""
    if not 3 <= k <= mp.n:
        raise DomainError(f"k={k} outside [3, {mp.n}]")
    ln = (
        log_binom(mp.n, k)
        + math.lgamma(k) - math.log(2)
        + k * math.log(mp.p)
        + (choose2(k) - k) * math.log1p(-mp.p)
    )
    return LogValue(ln)


def log_expected_exact_edges_count(mp: ModelParams, k: int, t: int) -> LogValue:
    """ln E[# k-sets inducing exactly t edges] = ln[C(n,k) C(K,t) p^t (1-p)^(K-t)], K = C(k,2)."""
    if not 0 <= k <= mp.n:
        raise DomainError(f"k={k} outside [0, {mp.n}]")
    K = k * (k - 1) // 2
    if not 0 <= t <= K:
        raise DomainError(f"t={t} outside [0, C({k},2)={K}]")
    ln = log_binom(mp.n, k) + log_binom(K, t)
    if t:
        ln += t * math.log(mp.p)
    if K - t:
        ln += (K - t) * math.log1p(-mp.p)
    return LogValue(ln)


# ------------------------------------------------------------- tree root k-hat

def gamma_log(mp: ModelParams, k: float) -> float:
    """Stirling-form ln E X_k for induced trees, extended to real k > 1."""
    if k <= 1:
        raise DomainError("gamma_log needs k > 1")
    return (
        k * mp.ln_n
        - 2.5 * math.log(k)
        + k
        - choose2(k) * mp.q_log
        + (k - 1) * math.log(mp.p / (1 - mp.p))
        - 0.5 * math.log(2 * math.pi)
    )


def khat(mp: ModelParams, tol: float = BISECTION_TOL, max_iter: int = BISECTION_MAX_ITER) -> float:
    """Root of gamma_log by bisection on [1.5 ln n / q, 4 ln n / q]."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    lo = max(1.5 * mp.ln_n / mp.q_log, 1.0 + 1e-9)
    hi = 4.0 * mp.ln_n / mp.q_log
    if hi <= lo:
        raise BracketError(f"empty bracket [{lo:.6g}, {hi:.6g}]", lo, hi, math.nan, math.nan)
    f_lo, f_hi = gamma_log(mp, lo), gamma_log(mp, hi)
    if not (f_lo > 0 > f_hi):
        raise BracketError(
            f"gamma_log has no sign change on [{lo:.6g}, {hi:.6g}]: values {f_lo:.6g}, {f_hi:.6g}",
            lo, hi, f_lo, f_hi,
        )
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = gamma_log(mp, mid)
        if abs(f_mid) <= tol:
            return mid
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * math.ulp(mid):
            break
    return mid


# -------------------------------------------------------------------- windows

def window_tree(mp: ModelParams, eps: float = DEFAULT_TREE_EPS, method: str = CLOSED_FORM) -> PredictionWindow:
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    if method == CLOSED_FORM:
        lo = math.floor(2 * mp.log_q(math.e * mp.n * mp.p) + 2 + eps)
    elif method == ROOT_BASED:
        lo = math.floor(khat(mp) - 1 + eps)
    else:
        raise DomainError(f"tree windows support closed_form or root_based, not {method!r}")
    return PredictionWindow.at(lo, method)


def window_path_cycle(mp: ModelParams) -> PredictionWindow:
    if mp.n * mp.p <= 1:
        raise DomainError("window_path_cycle needs n p > 1")
    lo = math.floor(2 * mp.log_q(mp.n * mp.p) + 2.9)
    return PredictionWindow.at(lo, CLOSED_FORM)


def independence_terms(mp: ModelParams) -> dict[str, float]:
    """Summands of the classical independence-number window (before flooring)."""
    log_n = mp.log_q(mp.n)
    if log_n <= 1:
        raise DomainError("log_q n must exceed 1")
    return {
        "two_log_n": 2 * log_n,
        "log_log_n": -2 * mp.log_q(log_n),
        "t_log_t": 0.0,
        "t_log_2bpe": 0.0,
        "two_log_e_half": 2 * mp.log_q(math.e / 2),
        "slack": 0.9,
    }


def fkm_terms(mp: ModelParams, t: int, b: float) -> dict[str, float]:
    """Summands of the at-most-t-edges window; ``b`` is a free constant."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if b <= 0:
        raise DomainError("b must be positive")
    log_n = mp.log_q(mp.n)
    if log_n <= 1:
        raise DomainError("log_q n must exceed 1 for log_q log_q n to be usable")
    return {
        "two_log_n": 2 * log_n,
        "log_log_n": (t - 2) * mp.log_q(log_n),
        "t_log_t": -t * mp.log_q(t) if t > 0 else 0.0,
        "t_log_2bpe": t * mp.log_q(2 * b * mp.p * math.e),
        "two_log_e_half": 2 * mp.log_q(math.e / 2),
        "slack": 0.9,
    }


def window_independence(mp: ModelParams) -> PredictionWindow:
    return PredictionWindow.at(math.floor(math.fsum(independence_terms(mp).values())), CLOSED_FORM)


def window_bounded_edges_fkm(mp: ModelParams, t: int, b: float) -> PredictionWindow:
    return PredictionWindow.at(math.floor(math.fsum(fkm_terms(mp, t, b).values())), CLOSED_FORM)


# ------------------------------------------------------ exact-t(k)-edges k0

def k_scan_max(mp: ModelParams) -> int:
    return min(mp.n, math.floor(4 * mp.ln_n / mp.q_log + 10))


def k0_edges(mp: ModelParams, tfn: Callable[[int], int], eps1: float = DEFAULT_EPS1) -> tuple[int, PredictionWindow]:
    """Moment threshold k0 for sets with exactly t(k) edges, and window {k0-1, k0}.

    k* = min k >= 3 with E X_k < 1.  k0 = k* if E X_{k*-1} > n^(1-2 eps1),
    otherwise k0 = k* - 1.
    """
    if not 0 < eps1 < 0.25:
        raise DomainError("eps1 must lie in (0, 1/4)")
    k_max = k_scan_max(mp)
    threshold = (1 - 2 * eps1) * mp.ln_n
    for k in range(3, k_max + 1):
        if log_expected_exact_edges_count(mp, k, tfn(k)).ln_mag < 0:
            t_prev = tfn(k - 1)
            if t_prev > (k - 1) * (k - 2) // 2:
                prev = -math.inf
            else:
                prev = log_expected_exact_edges_count(mp, k - 1, t_prev).ln_mag
            k0 = k if prev > threshold else k - 1
            return k0, PredictionWindow.at(k0 - 1, MOMENT_BASED)
    raise ScanRangeError(f"E X_k >= 1 for every k in [3, {k_max}]", k_max)


# ------------------------------------------------------ t(k) validation

@dataclass(frozen=True)
class Violation:
    k: int
    condition: str  # "ratio", "density" or "zero_t"
    lhs: float
    rhs: float
    informational: bool = False

    def to_dict(self) -> dict:
        return {"k": self.k, "condition": self.condition, "lhs": self.lhs, "rhs": self.rhs,
                "informational": self.informational}


def validate_t_sequence(tfn: EdgeBudgetFn, k_lo: int, k_hi: int, R: float | None = None,
                        eps: float | None = None) -> list[Violation]:
    """Check |t(k+1)/t(k) - 1| <= R/k and t(k) < eps k^2 for k in [k_lo, k_hi].

    ``t(k) = 0`` skips the ratio check and yields an informational record.
    """
    if k_lo < 3:
        raise DomainError("k_lo must be at least 3")
    R = tfn.R if R is None else R
    eps = tfn.eps if eps is None else eps
    out: list[Violation] = []
    for k in range(k_lo, k_hi + 1):
        t0 = tfn(k)
        if not t0 < eps * k * k:
            out.append(Violation(k, "density", float(t0), eps * k * k))
        if t0 == 0:
            out.append(Violation(k, "zero_t", 0.0, R / k, informational=True))
            continue
        t1 = tfn(k + 1)
        # cross-multiplied form of |t1/t0 - 1| <= R/k, exact for integer t
        if abs(t1 - t0) * k > R * t0:
            out.append(Violation(k, "ratio", abs(t1 / t0 - 1), R / k))
    return out
