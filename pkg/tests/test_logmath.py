import math

import pytest
from hypothesis import given, strategies as st
from scipy.special import gammaln, logsumexp as sp_logsumexp

from twopoint.logmath import NEG_INF, LogValue, choose2, log_binom, logsumexp


@given(st.integers(0, 400), st.integers(-3, 403))
def test_log_binom_matches_exact_integer(n, k):
    got = log_binom(n, k)
    if k < 0 or k > n:
        assert got == NEG_INF
    else:
        assert got == pytest.approx(math.log(math.comb(n, k)), rel=1e-12, abs=1e-12)


@given(st.integers(2000, 10**7), st.integers(1001, 1900))
def test_log_binom_lgamma_branch_against_scipy(n, k):
    want = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    assert log_binom(n, k) == pytest.approx(want, rel=1e-10)


def test_log_binom_huge_n():
    # n beyond float precision: ln C(n, 3) ~ 3 ln n - ln 6
    n = 10**40
    assert log_binom(n, 3) == pytest.approx(3 * math.log(n) - math.log(6), rel=1e-14)


@given(st.lists(st.floats(-700, 700), min_size=1, max_size=30))
def test_logsumexp_against_scipy(xs):
    assert logsumexp(xs) == pytest.approx(float(sp_logsumexp(xs)), rel=1e-12, abs=1e-12)


def test_logsumexp_edge_cases():
    assert logsumexp([]) == NEG_INF
    assert logsumexp([NEG_INF, NEG_INF]) == NEG_INF
    assert logsumexp([NEG_INF, 0.0]) == 0.0
    assert logsumexp([math.inf, 1.0]) == math.inf


def test_choose2_real_and_integer():
    assert choose2(5) == 10
    assert choose2(2.5) == pytest.approx(1.875)


def test_logvalue_sign_normalization():
    z = LogValue(NEG_INF, 1)
    assert z.sign == 0
    assert LogValue(3.0, 0).ln_mag == NEG_INF
    assert LogValue.zero().value == 0.0
    with pytest.raises(ValueError):
        LogValue(0.0, 2)


@given(st.floats(-1e6, 1e6).filter(lambda x: abs(x) > 1e-300), st.floats(-1e6, 1e6).filter(lambda x: abs(x) > 1e-300))
def test_logvalue_product(a, b):
    prod = LogValue.from_float(a) * LogValue.from_float(b)
    assert float(prod) == pytest.approx(a * b, rel=1e-12)
