"""Second-moment bound objects for induced trees and exact-edge subgraphs.

Everything is returned as a natural logarithm.  Overlap size is ``ell``;
``K = C(k, 2)`` and ``L = C(ell, 2)`` in the exact-edge part.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .errors import DomainError
from .logmath import NEG_INF, choose2, log_binom, logsumexp
from .predictor import ModelParams, khat, log_expected_tree_count

log = logging.getLogger(__name__)

HIGH_R, MID_R, LOW_R = "high_r", "mid_r", "low_r"
_ONE_MINUS_INV_E = 1 - 1 / math.e


# ------------------------------------------------------------ induced trees

def tree_branch(ell: float, r: float) -> str:
    """Which counting bound applies; boundaries go to the upper branch."""
    if r >= ell * _ONE_MINUS_INV_E:
        return HIGH_R
    if r >= ell / 2:
        return MID_R
    return LOW_R


def tree_extension_bound_log(k: int, ell: int, r: int) -> float:
    """ln f(k, ell, r): trees on a k-set agreeing with a fixed r-edge forest on ell shared vertices."""
    if not 2 <= ell < k:
        raise DomainError(f"need 2 <= ell < k, got ell={ell}, k={k}")
    if not 0 <= r <= ell - 1:
        raise DomainError(f"need 0 <= r <= ell-1, got r={r}")
    tail = (k - r - 2) * math.log(k - ell) + (k - ell - 1) * math.log(ell + 1)
    branch = tree_branch(ell, r)
    if branch == HIGH_R:
        head = (ell - r) * math.log(ell / (ell - r))
    elif branch == MID_R:
        head = (2 * r - ell) * math.log(3) + (2 * ell - 3 * r) * math.log(2)
    else:
        head = r * math.log(2)
    return head + tail


def tree_g_log(mp: ModelParams, k: int, ell: int, r: int) -> float:
    """ln g(k, ell, r) = ln f(k, ell, r) + r ln((1-p)/p)."""
    return tree_extension_bound_log(k, ell, r) + r * math.log((1 - mp.p) / mp.p)


def tree_f0_log(k: int, c: int, r: float, branch: str | None = None) -> float:
    """ln f0(k, r) at overlap ell = k - c; real r allowed.

    ``branch`` forces one formula, used to take one-sided limits at the
    discontinuities ell/2 and ell(1 - 1/e).
    """
    ell = k - c
    if ell <= 0:
        raise DomainError("need k > c")
    branch = branch or tree_branch(ell, r)
    if branch == HIGH_R:
        return (k - r) * math.log(ell / (ell - r))
    if branch == MID_R:
        return k * math.log(4 / 3) + r * math.log(9 / 8)
    return r * math.log(2)


def tree_f1_log(mp: ModelParams, k: int, c: int, r: float, branch: str | None = None) -> float:
    """ln f1(k, r) = ln f0(k, r) + (k - r) ln(c p / (1 - p))."""
    return tree_f0_log(k, c, r, branch) + (k - r) * math.log(c * mp.p / (1 - mp.p))


def small_ell_limit(mp: ModelParams) -> float:
    """Upper end of the small-overlap regime, 2 ln n / q - 6 ln ln n / q."""
    return (2 * mp.ln_n - 6 * math.log(mp.ln_n)) / mp.q_log


def _overlap_ratio_log(mp: ModelParams, k: int, ell: int) -> float:
    # ln[C(k,ell) C(n-k,k-ell) / C(n,k)]
    return log_binom(k, ell) + log_binom(mp.n - k, k - ell) - log_binom(mp.n, k)


def tree_ratio_small_ell_log(mp: ModelParams, k: int, ell: int) -> float:
    """ln of the trivial-count bound on F_ell / (E X_k)^2 for small overlaps.

    When 1-p > p an extra ((1-p)/p)^ell factor applies.
    """
    if not 2 <= ell <= small_ell_limit(mp):
        raise DomainError(f"ell={ell} outside small regime [2, {small_ell_limit(mp):.4g}]")
    if ell > k:
        raise DomainError("ell must not exceed k")
    val = _overlap_ratio_log(mp, k, ell) + choose2(ell) * mp.q_log
    if 1 - mp.p > mp.p:
        val += ell * math.log((1 - mp.p) / mp.p)
    return val


def tree_ratio_large_ell_log(mp: ModelParams, k: int, ell: int) -> float:
    """ln F~_ell, the r = 0 bound on F_ell / (E X_k)^2 for large overlaps."""
    if not small_ell_limit(mp) < ell <= k - 2:
        raise DomainError(f"ell={ell} outside large regime ({small_ell_limit(mp):.4g}, {k - 2}]")
    if ell > k - 2 * (1 - mp.p) / mp.p:
        raise DomainError(f"ell={ell} exceeds k - 2(1-p)/p where g(k, ell, r) need not decrease in r")
    return (
        _overlap_ratio_log(mp, k, ell)
        + choose2(ell) * mp.q_log
        + (k - 2) * math.log(k - ell)
        + (k - ell - 1) * math.log(ell + 1)
        - (k - 2) * math.log(k)
    )


def tree_ratio_step_log(mp: ModelParams, k: int, ell: int) -> float:
    """ln(F~_{ell+1} / F~_ell) from the closed-form ratio (no regime check)."""
    return (
        2 * math.log(k - ell)
        - math.log(ell + 1)
        - math.log(mp.n - 2 * k + ell + 1)
        + ell * mp.q_log
        + (k - 2) * math.log((k - ell - 1) / (k - ell))
        + (k - ell - 2) * math.log((ell + 2) / (ell + 1))
        - math.log(ell + 1)
    )


@dataclass(frozen=True)
class TreeOverlapTerm:
    k: int
    ell: int
    r: int
    branch: str
    ln_f: float
    ln_ratio: float


def tree_overlap_term(mp: ModelParams, k: int, ell: int, r: int) -> TreeOverlapTerm:
    """ln f and ln of the full F_ell summand over (E X_k)^2 at a fixed r."""
    ln_f = tree_extension_bound_log(k, ell, r)
    ln_ratio = (
        _overlap_ratio_log(mp, k, ell)
        + choose2(ell) * mp.q_log
        + r * math.log((1 - mp.p) / mp.p)
        + ln_f
        - (k - 2) * math.log(k)
    )
    return TreeOverlapTerm(k, ell, r, tree_branch(ell, r), ln_f, ln_ratio)


@dataclass(frozen=True)
class ReportRow:
    ell: int | None
    regime: str
    ln_term: float


@dataclass
class ChebyshevReport:
    n: int
    p: float
    eps: float
    k: int
    rows: list[ReportRow]

    @property
    def total(self) -> float:
        return logsumexp(r.ln_term for r in self.rows)

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "eps": self.eps, "k": self.k, "ln_total": self.total}


def tree_chebyshev_report(mp: ModelParams, eps: float = 0.45) -> ChebyshevReport:
    """Per-overlap ln contributions to Var X_k / (E X_k)^2 at k = floor(k_hat - 1 + eps).

    Diagnostic only; nothing is asserted about the total at finite n.
    """
    k = math.floor(khat(mp) - 1 + eps)
    if k < 4:
        raise DomainError(f"k={k} too small for a report")
    limit = small_ell_limit(mp)
    rows = []
    for ell in range(2, k - 1):
        if ell <= limit:
            rows.append(ReportRow(ell, "small", tree_ratio_small_ell_log(mp, k, ell)))
        else:
            rows.append(ReportRow(ell, "large", tree_ratio_large_ell_log(mp, k, ell)))
    rows.append(ReportRow(None, "inverse_mean", -log_expected_tree_count(mp, k).ln_mag))
    return ChebyshevReport(mp.n, mp.p, eps, k, rows)


# ------------------------------------------------------ exact-edge subgraphs

def _KL(k: int, ell: int) -> tuple[int, int]:
    return k * (k - 1) // 2, ell * (ell - 1) // 2


def j_range(k: int, ell: int, t: int) -> tuple[int, int]:
    K, L = _KL(k, ell)
    return max(0, t - K + L), min(t, L)


def edges_H_log(mp: ModelParams, k: int, ell: int, t: int, j: int) -> float:
    """ln H_{ell,j} = ln[C(L,j) C(K-L,t-j)^2 / C(K,t)] + (j-t) ln((1-p)/p)."""
    lo, hi = j_range(k, ell, t)
    if not lo <= j <= hi:
        raise DomainError(f"j={j} outside [{lo}, {hi}]")
    K, L = _KL(k, ell)
    return (
        log_binom(L, j)
        + 2 * log_binom(K - L, t - j)
        - log_binom(K, t)
        + (j - t) * math.log((1 - mp.p) / mp.p)
    )


def edges_F_log(mp: ModelParams, k: int, ell: int, t: int) -> float:
    """ln F_ell of the pair-overlap decomposition of E X_k(X_k - 1)."""
    if not 0 <= ell <= k - 1:
        raise DomainError(f"ell={ell} outside [0, {k - 1}]")
    K, L = _KL(k, ell)
    if not 0 <= t <= K:
        raise DomainError(f"t={t} outside [0, {K}]")
    lo, hi = j_range(k, ell, t)
    if lo > hi:
        raise DomainError(f"empty j range for k={k}, ell={ell}, t={t}")
    w = math.log((1 - mp.p) / mp.p)
    inner = logsumexp(
        log_binom(L, j) + 2 * log_binom(K - L, t - j) + j * w for j in range(lo, hi + 1)
    )
    return log_binom(k, ell) + log_binom(mp.n - k, k - ell) + L * mp.q_log + inner


@dataclass(frozen=True)
class EdgeOverlapTerm:
    k: int
    ell: int
    t: int
    K: int
    L: int
    ln_G: float
    ln_A: float
    ln_G_tilde: float
    ln_G_hat: float


def edges_G_values(mp: ModelParams, k: int, ell: int, t: int) -> EdgeOverlapTerm:
    """ln G_ell, ln A(t), ln G~_ell = ln G + L ln A, and the tilted ln G^_ell."""
    if not 2 <= ell <= k - 1:
        raise DomainError(f"ell={ell} outside [2, {k - 1}]")
    K, L = _KL(k, ell)
    if not 0 <= t < K:
        raise DomainError(f"t={t} outside [0, {K})")
    p = mp.p
    ln_G = _overlap_ratio_log(mp, k, ell) + L * mp.q_log
    ln_A = math.log1p((1 - p) / p * (t / (K - t)) ** 2)
    tilt = 2 * math.sqrt(2 * p / (1 - p)) * math.sqrt(t) * (k - ell) + 6 * p / (1 - p) * (k - ell) ** 2
    return EdgeOverlapTerm(k, ell, t, K, L, ln_G, ln_A, ln_G + L * ln_A, ln_G + tilt)


@dataclass(frozen=True)
class StationaryPair:
    j1: float
    j2: float
    t: int
    c2: float


def edges_h_roots(mp: ModelParams, k: int, ell: int, t: int) -> StationaryPair:
    """Both roots of (t - j)^2 / j = 2p(k - ell)^2 / (1 - p)."""
    if ell >= k:
        raise DomainError("need ell < k")
    if t < 1:
        raise DomainError("need t >= 1")
    p = mp.p
    s = p / (1 - p) * (k - ell) ** 2
    j2 = t + s * (1 + math.sqrt(1 + 2 * t / s))
    # the other root via the product j1 j2 = t^2 avoids cancellation
    return StationaryPair(t * t / j2, j2, t, 2 * s)


def edges_h(mp: ModelParams, k: int, ell: int, t: int, j: float) -> float:
    """The exponent h(j) whose maximum controls the middle j terms."""
    p = mp.p
    return (
        -j * math.log(2)
        - j * math.log(j)
        + 2 * (t - j) * math.log(k - ell)
        - 2 * (t - j) * math.log(t - j)
        + (j - t) * (math.log((1 - p) / p) - 1)
    )


@dataclass(frozen=True)
class DeltaInterval:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo >= self.hi

    def choose(self) -> float:
        """Midpoint if non-empty, else hi/2 (with a warning)."""
        if self.empty:
            log.warning("delta interval (%.6g, %.6g) is empty; using hi/2", self.lo, self.hi)
            return self.hi / 2
        return 0.5 * (self.lo + self.hi)


def delta_interval(mp: ModelParams, eps: float) -> DeltaInterval:
    if not 0 < eps < 0.5:
        raise DomainError("eps must lie in (0, 1/2)")
    q, p = mp.q_log, mp.p
    lo = (1 / (1 - p)) / q * 4 * eps / (1 - 2 * eps)
    hi = q / (12 * p / (1 - p) + q)
    return DeltaInterval(lo, hi)


def ell_star(mp: ModelParams, delta: float) -> int:
    return math.floor((2 - delta) * mp.ln_n / mp.q_log)


# -------------------------------------------------------- shape diagnostics

def sign_changes(values) -> list[int]:
    """Indices i where consecutive differences change sign between i-1 and i."""
    diffs = [b - a for a, b in zip(values, values[1:])]
    signs = [d > 0 for d in diffs if d != 0]
    return [i for i in range(1, len(signs)) if signs[i] != signs[i - 1]]


def valley_shape(values) -> tuple[bool, int]:
    """(is the sequence non-increasing then non-decreasing, index of its minimum).

    A monotone sequence counts as a valley with the turning point at an end.
    """
    diffs = [b - a for a, b in zip(values, values[1:])]
    seen_up = False
    for d in diffs:
        if d > 0:
            seen_up = True
        elif d < 0 and seen_up:
            return False, min(range(len(values)), key=values.__getitem__)
    return True, min(range(len(values)), key=values.__getitem__)


def superadditive_gap(a: float, A: float, b: float, B: float) -> float:
    """ln[(1+(a+b)/(A+B))^(A+B)] - ln[(1+a/A)^A (1+b/B)^B]; non-negative."""
    return (A + B) * math.log1p((a + b) / (A + B)) - A * math.log1p(a / A) - B * math.log1p(b / B)
