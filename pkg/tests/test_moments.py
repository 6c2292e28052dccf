import math
import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import assume, given, strategies as st

from twopoint import moments as mo
from twopoint import predictor as pr
from twopoint.errors import DomainError
from twopoint.predictor import EdgeBudgetFn, ModelParams

MP6 = ModelParams(10**6, 0.5)


# ---------------------------------------------------------------- tree counting bounds

@pytest.mark.parametrize("k,ell,r,value,branch", [
    (5, 3, 0, 32, mo.LOW_R),
    (5, 3, 2, 24, mo.HIGH_R),
    (10, 8, 4, 2304, mo.MID_R),
])
def test_extension_bound_examples(k, ell, r, value, branch):
    assert mo.tree_branch(ell, r) == branch
    assert mo.tree_extension_bound_log(k, ell, r) == pytest.approx(math.log(value), rel=1e-12)


def test_extension_bound_domain():
    with pytest.raises(DomainError):
        mo.tree_extension_bound_log(5, 5, 0)
    with pytest.raises(DomainError):
        mo.tree_extension_bound_log(6, 3, 3)


@given(st.integers(3, 80), st.data())
def test_extension_bound_matches_exact_products(k, data):
    ell = data.draw(st.integers(2, k - 1))
    r = data.draw(st.integers(0, ell - 1))
    tail = Fraction(k - ell) ** (k - r - 2) * (ell + 1) ** (k - ell - 1)
    branch = mo.tree_branch(ell, r)
    if branch == mo.HIGH_R:
        head = Fraction(ell, ell - r) ** (ell - r)
    elif branch == mo.MID_R:
        head = Fraction(3) ** (2 * r - ell) * Fraction(2) ** (2 * ell - 3 * r)
    else:
        head = Fraction(2) ** r
    val = head * tail
    want = math.log(val.numerator) - math.log(val.denominator)
    assert mo.tree_extension_bound_log(k, ell, r) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_branch_boundaries_go_up():
    ell = 10
    assert mo.tree_branch(ell, 5) == mo.MID_R  # r = ell / 2 exactly
    assert mo.tree_branch(ell, 4.999) == mo.LOW_R
    r2 = ell * (1 - 1 / math.e)
    assert mo.tree_branch(ell, r2) == mo.HIGH_R
    assert mo.tree_branch(ell, r2 - 1e-9) == mo.MID_R


@given(st.integers(10, 200), st.integers(1, 8), st.floats(0.1, 0.9))
def test_f1_jumps_up_at_both_discontinuities(k, c, p):
    assume(k - c >= 4)
    mp = ModelParams(1000, p)
    ell = k - c
    r1, r2 = ell / 2, ell * (1 - 1 / math.e)
    assert mo.tree_f1_log(mp, k, c, r1, mo.MID_R) > mo.tree_f1_log(mp, k, c, r1, mo.LOW_R)
    assert mo.tree_f1_log(mp, k, c, r2, mo.HIGH_R) > mo.tree_f1_log(mp, k, c, r2, mo.MID_R)


def test_g_adds_weight():
    mp = ModelParams(1000, 0.3)
    assert mo.tree_g_log(mp, 12, 6, 2) == pytest.approx(
        mo.tree_extension_bound_log(12, 6, 2) + 2 * math.log(0.7 / 0.3))


# ---------------------------------------------------------------- tree ratios

def test_small_ell_branches():
    k = math.floor(pr.khat(MP6) - 0.55)
    raz = mo.tree_ratio_small_ell_log(ModelParams(10**6, 0.7), k, 5)
    base = mo._overlap_ratio_log(ModelParams(10**6, 0.7), k, 5) + 10 * ModelParams(10**6, 0.7).q_log
    assert raz == pytest.approx(base)
    mp3 = ModelParams(10**6, 0.3)
    dva = mo.tree_ratio_small_ell_log(mp3, k, 5)
    plain = mo._overlap_ratio_log(mp3, k, 5) + 10 * mp3.q_log
    assert dva - plain == pytest.approx(5 * math.log(0.7 / 0.3))
    with pytest.raises(DomainError):
        mo.tree_ratio_small_ell_log(MP6, k, k - 2)


def test_small_ell_at_two_is_tiny():
    k = math.floor(pr.khat(MP6) - 0.55)
    assert mo.tree_ratio_small_ell_log(MP6, k, 2) <= -2 * (math.log(k) - 3)


def test_large_ell_regime_checks():
    k = math.floor(pr.khat(MP6) - 0.55)
    assert math.isfinite(mo.tree_ratio_large_ell_log(MP6, k, k - 3))
    with pytest.raises(DomainError):
        mo.tree_ratio_large_ell_log(MP6, k, 5)
    with pytest.raises(DomainError):
        mo.tree_ratio_large_ell_log(ModelParams(10**6, 0.2), k, k - 3)  # beyond k - 2(1-p)/p


@given(st.integers(10**4, 10**12), st.floats(0.2, 0.8))
def test_step_ratio_equals_difference(n, p):
    mp = ModelParams(n, p)
    k = pr.window_tree(mp, 0.45, pr.ROOT_BASED).lo
    lo = math.floor(mo.small_ell_limit(mp)) + 1
    hi = min(k - 3, math.floor(k - 2 * (1 - p) / p) - 1)
    for ell in range(max(lo, 2), hi + 1):
        diff = mo.tree_ratio_large_ell_log(mp, k, ell + 1) - mo.tree_ratio_large_ell_log(mp, k, ell)
        assert mo.tree_ratio_step_log(mp, k, ell) == pytest.approx(diff, abs=1e-8)


def test_step_ratio_rises_then_falls_at_moderate_n():
    # at n = 1e6 the (1-p)^(-ell) factor wins over the other terms for most of the range
    k = math.floor(pr.khat(MP6) - 0.55)
    ells = range(math.floor(mo.small_ell_limit(MP6)) + 1, k - 2)
    steps = [mo.tree_ratio_step_log(MP6, k, ell) for ell in ells]
    peak = max(range(len(steps)), key=steps.__getitem__)
    assert 0 < peak < len(steps) - 1
    assert all(b > a for a, b in zip(steps[:peak], steps[1:peak + 1]))
    assert all(b < a for a, b in zip(steps[peak:], steps[peak + 1:]))


@pytest.mark.parametrize("exp10", [1000, 3000])
def test_step_ratio_decreasing_at_huge_n(exp10):
    mp = ModelParams(10**exp10, 0.5)
    k = pr.window_tree(mp, 0.45, pr.ROOT_BASED).lo
    ells = range(math.floor(mo.small_ell_limit(mp)) + 1, k - 2)
    steps = [mo.tree_ratio_step_log(mp, k, ell) for ell in ells]
    assert all(b < a for a, b in zip(steps, steps[1:]))


def test_step_ratio_jump_near_k():
    k = math.floor(pr.khat(MP6) - 0.55)
    ell = k - max(2, math.ceil(8 / math.log(2)))
    assert mo.tree_ratio_step_log(MP6, k, ell) >= 0.5 * MP6.ln_n - 20 * math.log(MP6.ln_n)


def test_chebyshev_report():
    rep = mo.tree_chebyshev_report(MP6, 0.45)
    ells = [r.ell for r in rep.rows if r.ell is not None]
    assert ells == list(range(2, rep.k - 1))
    inv = [r for r in rep.rows if r.regime == "inverse_mean"]
    assert len(inv) == 1
    assert inv[0].ln_term == -pr.log_expected_tree_count(MP6, rep.k).ln_mag
    assert math.isfinite(rep.total)
    assert mo.tree_chebyshev_report(ModelParams(10**9, 0.5), 0.45).total < rep.total
    assert rep.to_dict()["ln_total"] == rep.total


# ---------------------------------------------------------------- exact-edge objects

def test_H_examples():
    mp = ModelParams(100, 0.5)
    assert mo.edges_H_log(mp, 6, 4, 3, 3) == pytest.approx(math.log(20 / 455))
    assert mo.edges_H_log(mp, 6, 4, 3, 0) == pytest.approx(math.log(7056 / 455))
    for p in (0.1, 0.5, 0.9):
        assert mo.edges_H_log(ModelParams(100, p), 6, 4, 3, 3) < 0
    with pytest.raises(DomainError):
        mo.edges_H_log(mp, 6, 4, 3, 7)


@given(st.integers(4, 40), st.floats(0.1, 0.9), st.data())
def test_H_against_exact(k, p, data):
    ell = data.draw(st.integers(2, k - 1))
    K, L = comb(k, 2), comb(ell, 2)
    t = data.draw(st.integers(0, K))
    lo, hi = mo.j_range(k, ell, t)
    assume(lo <= hi)
    j = data.draw(st.integers(lo, hi))
    ratio = Fraction(comb(L, j) * comb(K - L, t - j) ** 2, comb(K, t))
    want = math.log(ratio.numerator) - math.log(ratio.denominator) + (j - t) * math.log((1 - p) / p)
    assert mo.edges_H_log(ModelParams(100, p), k, ell, t, j) == pytest.approx(want, rel=1e-9, abs=1e-9)


@given(st.integers(4, 30), st.floats(0.1, 0.9), st.data())
def test_H_zero_one_relation(k, p, data):
    ell = data.draw(st.integers(2, k - 1))
    K, L = comb(k, 2), comb(ell, 2)
    t = data.draw(st.integers(1, K - L))
    mp = ModelParams(100, p)
    lhs = math.exp(mo.edges_H_log(mp, k, ell, t, 0) - mo.edges_H_log(mp, k, ell, t, 1))
    assert lhs == pytest.approx((K - L - t + 1) ** 2 * p / (L * t * t * (1 - p)), rel=1e-6)


def test_F_examples():
    mp = ModelParams(100, 0.5)
    want = math.log(comb(94, 6)) + 2 * math.log(comb(15, 3))
    assert mo.edges_F_log(mp, 6, 0, 3) == pytest.approx(want, rel=1e-12)
    want = math.log(6 * 94) + 10 * math.log(2)
    assert mo.edges_F_log(mp, 6, 5, 0) == pytest.approx(want, rel=1e-12)
    with pytest.raises(DomainError):
        mo.edges_F_log(mp, 6, 6, 0)


@given(st.integers(3, 12), st.floats(0.1, 0.9), st.data())
def test_F_against_exact_sum(k, p, data):
    n = 30
    ell = data.draw(st.integers(0, k - 1))
    K, L = comb(k, 2), comb(ell, 2)
    t = data.draw(st.integers(0, K))
    lo, hi = mo.j_range(k, ell, t)
    assume(lo <= hi)
    pf = Fraction(p).limit_denominator(10**4)
    mp = ModelParams(n, float(pf))
    w = (1 - pf) / pf
    inner = sum(comb(L, j) * comb(K - L, t - j) ** 2 * w**j for j in range(lo, hi + 1))
    total = comb(k, ell) * comb(n - k, k - ell) * (1 - pf) ** (-L) * inner
    want = math.log(total.numerator) - math.log(total.denominator)
    got = mo.edges_F_log(mp, k, ell, t)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-9)
    largest = max(math.log(comb(L, j) * comb(K - L, t - j) ** 2) + j * math.log(float(w)) for j in range(lo, hi + 1))
    assert got >= math.log(comb(k, ell) * comb(n - k, k - ell)) - L * math.log(1 - float(pf)) + largest - 1e-9


def test_F_sums_to_second_factorial_moment():
    # sum over ell of F_ell p^2t (1-p)^(2K-2t) C(n,k) is E X_k (X_k - 1) + E X_k
    n, k, t, p = 12, 4, 2, 0.4
    mp = ModelParams(n, p)
    K = comb(k, 2)
    total = sum(math.exp(mo.edges_F_log(mp, k, ell, t)) for ell in range(0, k))
    second = math.log(total) + math.log(comb(n, k)) + 2 * t * math.log(p) + 2 * (K - t) * math.log(1 - p)
    mean = pr.log_expected_exact_edges_count(mp, k, t).value
    # ell = k (identical sets) contributes E X_k itself
    assert math.exp(second) + mean == pytest.approx(exact_second_moment(n, k, t, p), rel=1e-9)


def exact_second_moment(n, k, t, p):
    """E X_k^2 summed over overlap sizes with exact per-pair probabilities."""
    K = comb(k, 2)
    total = comb(n, k) * comb(K, t) * p**t * (1 - p) ** (K - t)  # identical sets
    for ell in range(0, k):
        L, rest = comb(ell, 2), K - comb(ell, 2)
        prob = 0.0
        for j in range(0, min(t, L) + 1):
            if t - j > rest:
                continue
            inside = comb(L, j) * p**j * (1 - p) ** (L - j)
            outside = comb(rest, t - j) * p ** (t - j) * (1 - p) ** (rest - t + j)
            prob += inside * outside**2
        total += comb(n, k) * comb(k, ell) * comb(n - k, k - ell) * prob
    return total


def test_G_values():
    mp = ModelParams(10**6, 0.5)
    term = mo.edges_G_values(mp, 30, 10, 0)
    assert term.ln_A == 0 and term.ln_G_tilde == term.ln_G
    term = mo.edges_G_values(mp, 30, 10, 5)
    K, L = comb(30, 2), comb(10, 2)
    assert term.ln_A == pytest.approx(math.log(1 + (5 / (K - 5)) ** 2))
    assert term.ln_G_tilde == pytest.approx(term.ln_G + L * term.ln_A)
    tilt = 2 * math.sqrt(2) * math.sqrt(5) * 20 + 6 * 400
    assert term.ln_G_hat - term.ln_G == pytest.approx(tilt)
    with pytest.raises(DomainError):
        mo.edges_G_values(mp, 30, 30, 5)


def test_G_sweep_n1e6():
    mp = ModelParams(10**6, 0.5)
    k = math.floor(2 * math.log2(10**6))
    t = EdgeBudgetFn.power(0.005, 2)(k)
    terms = [mo.edges_G_values(mp, k, ell, t) for ell in range(2, k - 1)]
    gt = [x.ln_G_tilde for x in terms]
    gh = [x.ln_G_hat for x in terms]
    assert len(mo.sign_changes(gt)) == 1 and mo.valley_shape(gt)[0]
    shape, idx = mo.valley_shape(gh)
    assert shape
    # the delta interval is empty at eps = 0.005, p = 0.5; the hi/2 fallback is used
    interval = mo.delta_interval(mp, 0.005)
    assert interval.empty
    assert 2 + idx < mo.ell_star(mp, interval.choose())


@given(st.integers(1000, 10**12), st.floats(0.05, 0.95), st.integers(3, 200), st.data())
def test_stationary_roots(n, p, k, data):
    ell = data.draw(st.integers(0, k - 1))
    t = data.draw(st.integers(1, 5000))
    sp = mo.edges_h_roots(ModelParams(n, p), k, ell, t)
    c2 = 2 * p * (k - ell) ** 2 / (1 - p)
    assert sp.c2 == pytest.approx(c2)
    assert sp.j1 * sp.j2 == pytest.approx(t * t, rel=1e-9)
    assert 0 < sp.j1 < t < sp.j2
    for j in (sp.j1, sp.j2):
        assert (t - j) ** 2 == pytest.approx(c2 * j, rel=1e-6)


def test_stationary_example():
    sp = mo.edges_h_roots(ModelParams(1000, 0.5), 20, 10, 50)
    assert sp.j2 == pytest.approx(50 + 100 * (1 + math.sqrt(2)))
    assert sp.j1 == pytest.approx(2500 / sp.j2)
    assert sp.j1 == pytest.approx(8.5786, abs=1e-4)
    with pytest.raises(DomainError):
        mo.edges_h_roots(ModelParams(1000, 0.5), 20, 20, 5)


def test_h_stationary_points_are_extrema():
    mp = ModelParams(1000, 0.5)
    k, ell, t = 30, 20, 40
    sp = mo.edges_h_roots(mp, k, ell, t)
    h = lambda j: mo.edges_h(mp, k, ell, t, j)
    # the interior root lies in (0, t), where h is defined
    d = 1e-4
    assert h(sp.j1) >= max(h(sp.j1 - d), h(sp.j1 + d)) or h(sp.j1) <= min(h(sp.j1 - d), h(sp.j1 + d))


def test_delta_interval_examples():
    half = ModelParams(100, 0.5)
    d = mo.delta_interval(half, 0.001)
    assert d.lo == pytest.approx((2 / math.log(2)) * (0.004 / 0.998))
    assert d.hi == pytest.approx(math.log(2) / (12 + math.log(2)))
    assert not d.empty
    assert mo.delta_interval(half, 0.01).empty
    assert d.choose() == pytest.approx((d.lo + d.hi) / 2)
    for p in (0.2, 0.5, 0.8):
        assert not mo.delta_interval(ModelParams(100, p), 1e-6).empty
    with pytest.raises(DomainError):
        mo.delta_interval(half, 0.5)


# ---------------------------------------------------------------- shape helpers and superadditivity

def test_shape_helpers():
    assert mo.sign_changes([5, 3, 1, 2, 4]) == [2]  # differences 1 and 2 disagree
    assert mo.sign_changes([1, 2, 3]) == []
    assert mo.valley_shape([5, 3, 1, 2, 4]) == (True, 2)
    assert mo.valley_shape([3, 2, 1]) == (True, 2)
    assert mo.valley_shape([1, 3, 1])[0] is False


@given(st.floats(0, 1e3), st.floats(1e-3, 1e3), st.floats(0, 1e3), st.floats(1e-3, 1e3))
def test_superadditivity(a, A, b, B):
    assert mo.superadditive_gap(a, A, b, B) >= -1e-9 * (1 + A + B)


def test_superadditivity_strict_on_random_tuples():
    rng = random.Random(3)
    for _ in range(1000):
        A, B = rng.uniform(0.1, 50), rng.uniform(0.1, 50)
        a, b = rng.uniform(0, A), rng.uniform(0, B)
        if abs(a / A - b / B) > 1e-3:
            assert mo.superadditive_gap(a, A, b, B) > 0


def test_evaluators_reproducible():
    vals = [mo.edges_F_log(MP6, 30, 12, 4), mo.tree_ratio_step_log(MP6, 40, 20), mo.edges_H_log(MP6, 30, 12, 4, 2)]
    again = [mo.edges_F_log(MP6, 30, 12, 4), mo.tree_ratio_step_log(MP6, 40, 20), mo.edges_H_log(MP6, 30, 12, 4, 2)]
    assert vals == again
