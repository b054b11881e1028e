import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtexp import (
    LaurentSeries,
    SymbolConvergenceError,
    derivative_wiener_norm,
    numerical_bandwidth,
    sym_add,
    sym_exp,
    sym_mul,
    sym_reverse,
    sym_scale,
    sym_split,
    sym_truncate,
    wiener_norm,
)

from conftest import random_symbol

coeff = st.floats(-10, 10, allow_nan=False)


@st.composite
def series(draw, max_len=12):
    c = draw(st.lists(coeff, min_size=1, max_size=max_len))
    lo = draw(st.integers(-len(c) + 1, 0))
    return LaurentSeries(c, lo)


def taylor_oracle(a, terms):
    """Partial Taylor sum of exp(a) by repeated direct convolution."""
    total = {0: 1.0}
    p_c, p_lo = np.array([1.0]), 0
    for i in range(1, terms + 1):
        p_c = np.convolve(p_c, a.coeffs) / i
        p_lo += a.lo
        for k, v in enumerate(p_c):
            total[p_lo + k] = total.get(p_lo + k, 0.0) + v
    return LaurentSeries.from_dict(total)


# construction

def test_trims_boundary_zeros_but_keeps_zero_index():
    a = LaurentSeries([0, 0, 1, 2, 0], -3)
    assert (a.lo, a.hi) == (-1, 0)
    assert LaurentSeries([0, 0, 5], 0).hi == 2
    z = LaurentSeries([0, 0, 0], -1)
    assert (z.lo, z.hi) == (0, 0) and z.is_zero


def test_positive_lo_is_padded_to_zero():
    a = LaurentSeries([3.0], 2)
    assert a.lo == 0 and a[2] == 3.0 and a[0] == 0


def test_real_storage_for_real_input():
    assert LaurentSeries([1 + 0j, 2 + 0j]).is_real
    assert not LaurentSeries([1j]).is_real


def test_evaluation():
    a = LaurentSeries([1.0, 2.0, 3.0], -1)
    assert a(2.0) == pytest.approx(0.5 + 2 + 6)


# norms

def test_wiener_norm_examples():
    assert wiener_norm(LaurentSeries.zero()) == 0
    assert wiener_norm(LaurentSeries([1, 2, 1], -1)) == 4
    assert wiener_norm(LaurentSeries(np.ones(16), -5)) == 16


def test_derivative_norm_examples():
    assert derivative_wiener_norm(LaurentSeries.constant(7.0)) == 0
    assert derivative_wiener_norm(LaurentSeries([1, 2, 1], -1)) == 2
    assert derivative_wiener_norm(LaurentSeries.from_dict({2: 3.0})) == 6


# arithmetic

def test_add_and_scale_examples():
    assert sym_add(LaurentSeries([1, 1]), LaurentSeries([1, -1])) == LaurentSeries.constant(2.0)
    alpha, q = 3.0, 4
    a = LaurentSeries([1, alpha, 1], -1)
    assert sym_scale(a, 1 / 2 ** q) == LaurentSeries([1 / 16, alpha / 16, 1 / 16], -1)
    assert sym_add(a, LaurentSeries.zero()) == a


def test_mul_examples():
    assert sym_mul(LaurentSeries([1, 1]), LaurentSeries([1, -1])) == LaurentSeries([1, 0, -1])
    assert sym_mul(LaurentSeries([1.0, 0], -1), LaurentSeries([0, 1.0])) == LaurentSeries.constant(1.0)


def test_mul_matches_direct_convolution(rng):
    a = random_symbol(rng, -4, 4)
    b = random_symbol(rng, -3, 5)
    c = sym_mul(a, b)
    direct = np.zeros(a.coeffs.size + b.coeffs.size - 1)
    for i, x in enumerate(a.coeffs):
        for j, y in enumerate(b.coeffs):
            direct[i + j] += x * y
    assert c.lo == a.lo + b.lo
    assert np.max(np.abs(c.coeffs - direct)) <= 1e-14 * np.max(np.abs(direct))


def test_long_mul_uses_fft_and_matches(rng):
    a = random_symbol(rng, -300, 200)
    b = random_symbol(rng, -100, 400, complex_=True)
    c = sym_mul(a, b)
    ref = np.convolve(a.coeffs, b.coeffs)
    assert np.max(np.abs(c.coeffs - ref)) <= 1e-12 * np.max(np.abs(ref))


@given(series(), series())
def test_submultiplicative(a, b):
    assert wiener_norm(sym_mul(a, b)) <= wiener_norm(a) * wiener_norm(b) * (1 + 1e-12) + 1e-300


# split / reverse

def test_split_examples():
    m, a0, p = sym_split(LaurentSeries([1, 2, 1], -1))
    assert m == LaurentSeries([0, 1]) and a0 == 2 and p == LaurentSeries([0, 1])
    m, a0, p = sym_split(LaurentSeries([5, 6, 7]))
    assert m.is_zero and a0 == 5 and p == LaurentSeries([0, 6, 7])


@given(series())
def test_split_round_trip_exact(a):
    m, a0, p = sym_split(a)
    back = sym_add(sym_add(sym_reverse(m), LaurentSeries.constant(a0)), p)
    assert back == a


def test_reverse():
    a = LaurentSeries([1, 2, 3, 4], -1)
    r = sym_reverse(a)
    assert (r.lo, r.hi) == (-2, 1)
    assert all(r[i] == a[-i] for i in range(-3, 3))


# truncation

def test_truncate_tiny_tail():
    a = LaurentSeries([1, 1e-20])
    t = sym_truncate(a, 1e-15)
    assert t.hi == 0 and wiener_norm(a - t) == 1e-20


def test_truncate_geometric_against_tail_sum_oracle():
    idx = np.arange(-30, 31)
    a = LaurentSeries(2.0 ** -np.abs(idx), -30)
    eps = 2.0 ** -10
    t = sym_truncate(a, eps)
    # oracle: drop symmetric tails k > K while 2 * sum_{k>K} 2^-k <= eps,
    # then at most one extra coefficient of modulus 2^-K if room remains
    dropped = math.fsum(np.abs((a - t).coeffs))
    assert dropped <= eps
    K = next(K for K in range(31) if 2 * math.fsum(2.0 ** -k for k in range(K + 1, 31)) <= eps)
    assert (t.lo, t.hi) in {(-K, K), (-K + 1, K), (-K, K - 1)}
    # minimality: dropping the smaller of the two boundary coefficients would exceed eps
    assert dropped + min(abs(t[t.lo]), abs(t[t.hi])) > eps * (1 - 1e-12)


def test_truncate_everything():
    a = LaurentSeries([1, 2, 3], -1)
    assert sym_truncate(a, 6.0).is_zero


@given(series(20), st.floats(1e-12, 5))
def test_truncate_never_exceeds_eps(a, eps):
    t = sym_truncate(a, eps)
    assert math.fsum(np.abs((a - t).coeffs)) <= eps


def test_truncate_rejects_nonpositive():
    with pytest.raises(ValueError):
        sym_truncate(LaurentSeries([1.0]), 0)


# exp

def test_exp_of_constants():
    assert sym_exp(LaurentSeries.zero()) == LaurentSeries.constant(1.0)
    b = sym_exp(LaurentSeries.constant(0.5 + 1j))
    assert b[0] == pytest.approx(np.exp(0.5 + 1j))


def test_exp_trid_matches_taylor_convolution_oracle():
    a = LaurentSeries([1.0, 0, 1.0], -1)
    b = sym_exp(a, 1e-14)
    ref = taylor_oracle(a, 40)
    assert wiener_norm(b - ref) <= 1e-12


@pytest.mark.parametrize("lo,hi", [(-1, 3), (-6, 0), (0, 4), (-20, 5)])
def test_exp_windows(rng, lo, hi):
    a = random_symbol(rng, lo, hi, norm=2.0, complex_=True)
    b = sym_exp(a, 1e-13)
    ref = taylor_oracle(a, 60)
    assert wiener_norm(b - ref) <= 1e-12 * wiener_norm(ref)


@given(series(8))
def test_exp_of_real_symbol_is_real(a):
    a = a * (2.0 / max(wiener_norm(a), 1e-300))
    assert sym_exp(a, 1e-13).is_real


@given(series(8))
def test_exp_half_squared_agrees(a):
    a = a * (3.0 / max(wiener_norm(a), 1e-300))
    tol = 1e-13
    b = sym_exp(a, tol)
    h = sym_exp(a * 0.5, tol)
    sq = sym_truncate(sym_mul(h, h), tol * wiener_norm(b))
    assert wiener_norm(sq - b) <= 10 * tol * wiener_norm(b)


def test_exp_unreachable_tolerance_raises():
    with pytest.raises(SymbolConvergenceError):
        sym_exp(LaurentSeries(np.ones(16), -10), 1e-18, max_points=1 << 14)


def test_numerical_bandwidth():
    b = LaurentSeries([1e-20, 1.0, 0.5, 1e-3], -1)
    assert numerical_bandwidth(b) == 3
    assert numerical_bandwidth(b, 1e-2) == 2
    assert numerical_bandwidth(LaurentSeries.zero()) == 0
