import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from qtexp import (
    CornerOverlapError,
    FiniteQTMatrix,
    LaurentSeries,
    LowRankCorrection,
    QTMatrix,
    dense_expm_oracle,
    dense_truncation,
    finite_expm,
    finite_square,
    numerical_bandwidth,
    sym_exp,
    sym_reverse,
)

from conftest import random_correction, random_symbol, rel_inf_error

TRID = LaurentSeries([1.0, 0.0, 1.0], -1)


# squaring

def test_square_hand_example():
    S = finite_square(FiniteQTMatrix(3, TRID))
    assert np.allclose(S.dense(), [[1, 0, 1], [0, 2, 0], [1, 0, 1]], atol=1e-15)
    T = FiniteQTMatrix(3, S.symbol).dense()
    assert np.allclose(T, [[2, 0, 1], [0, 2, 0], [1, 0, 2]])
    e1 = np.diag([1.0, 0, 0])
    assert np.allclose(S.nw.dense(3, 3), -e1, atol=1e-15)
    assert np.allclose(S.se.dense(3, 3), -e1, atol=1e-15)
    assert np.allclose(S.se.dense(3, 3)[::-1, ::-1], -np.diag([0, 0, 1.0]), atol=1e-15)


def test_square_upper_triangular_keeps_zero_corners(rng):
    a = random_symbol(rng, 0, 4)
    S = finite_square(FiniteQTMatrix(10, a))
    assert S.nw.is_zero and S.se.is_zero
    M = FiniteQTMatrix(10, a).dense()
    assert np.allclose(S.dense(), M @ M)


@pytest.mark.parametrize("lo,hi", [(-5, 3), (-2, 9), (-7, 7)])
def test_square_matches_dense(rng, lo, hi):
    A = FiniteQTMatrix(64, random_symbol(rng, lo, hi))
    M = A.dense()
    S = finite_square(A)
    assert rel_inf_error(S.dense(), M @ M) <= 1e-12
    S2 = finite_square(S)
    assert rel_inf_error(S2.dense(), np.linalg.matrix_power(M, 4)) <= 1e-12


def test_square_with_corners_matches_dense(rng):
    A = FiniteQTMatrix(64, random_symbol(rng, -3, 3),
                       random_correction(rng, 6, 5, 2), random_correction(rng, 4, 7, 2))
    M = A.dense()
    assert rel_inf_error(finite_square(A).dense(), M @ M) <= 1e-12


def test_square_requires_n_above_symbol_width():
    with pytest.raises(CornerOverlapError):
        finite_square(FiniteQTMatrix(2, TRID))


def test_overlapping_corners_rejected(rng):
    with pytest.raises(CornerOverlapError):
        FiniteQTMatrix(8, TRID, random_correction(rng, 5, 5, 1), random_correction(rng, 4, 4, 1))
    with pytest.raises(CornerOverlapError):
        FiniteQTMatrix(4, TRID, random_correction(rng, 5, 2, 1))
    with pytest.raises(ValueError):
        FiniteQTMatrix(0, TRID)


# exponential

def test_expm_constant():
    X = finite_expm(FiniteQTMatrix(7, LaurentSeries.constant(0.3)))
    assert np.allclose(X.dense(), np.exp(0.3) * np.eye(7), rtol=1e-15)
    assert X.nw.is_zero and X.se.is_zero


def test_expm_upper_triangular(rng):
    a = random_symbol(rng, 0, 3, norm=2.0)
    X = finite_expm(FiniteQTMatrix(30, a))
    assert X.nw.is_zero and X.se.is_zero
    ref = dense_expm_oracle(FiniteQTMatrix(30, a).dense())
    assert rel_inf_error(X.dense(), ref) <= 1e-13


@pytest.mark.parametrize("alpha", [0.0, 2.0, -3.0])
def test_expm_trid_n200(alpha):
    A = FiniteQTMatrix(200, LaurentSeries([1.0, alpha, 1.0], -1))
    X = finite_expm(A, 1e-13)
    assert rel_inf_error(X.dense(), dense_expm_oracle(A.dense())) <= 1e-11


@settings(max_examples=6)
@given(st.integers(0, 10 ** 6), st.integers(1, 6), st.integers(1, 6))
def test_expm_matches_oracle_when_n_is_large(seed, nm, np_):
    rng = np.random.default_rng(seed)
    a = random_symbol(rng, -nm, np_, norm=rng.uniform(0.5, 3.0))
    n = 4 * numerical_bandwidth(sym_exp(a, 1e-13))
    A = FiniteQTMatrix(n, a)
    tol = 1e-13
    assert rel_inf_error(finite_expm(A, tol).dense(), dense_expm_oracle(A.dense())) <= 100 * tol


def test_se_corner_is_flipped_nw_of_reversed_symbol(rng):
    a = random_symbol(rng, -4, 2, norm=2.0)
    n = 150
    X = finite_expm(FiniteQTMatrix(n, a))
    Y = finite_expm(FiniteQTMatrix(n, sym_reverse(a)))
    assert np.allclose(X.se.dense(40, 40), Y.nw.dense(40, 40), atol=1e-15, rtol=0)
    assert np.allclose(X.nw.dense(40, 40), Y.se.dense(40, 40), atol=1e-15, rtol=0)


def test_expm_with_corners(rng):
    a = random_symbol(rng, -3, 3, norm=1.5)
    A = FiniteQTMatrix(4 * numerical_bandwidth(sym_exp(a)), a,
                       random_correction(rng, 5, 5, 2, 0.1), random_correction(rng, 4, 6, 2, 0.1))
    X = finite_expm(A)
    assert rel_inf_error(X.dense(), dense_expm_oracle(A.dense())) <= 1e-11


def test_expm_too_small_n_raises():
    with pytest.raises(CornerOverlapError):
        finite_expm(FiniteQTMatrix(12, LaurentSeries([1.0, 2.0, 1.0], -1)))


# dense reference path

def test_oracle_examples():
    assert np.array_equal(dense_expm_oracle(np.zeros((3, 3))), np.eye(3))
    d = np.array([0.5, -2.0, 3.0])
    assert np.allclose(dense_expm_oracle(np.diag(d)), np.diag(np.exp(d)), rtol=1e-14, atol=0)
    assert np.allclose(dense_expm_oracle(np.array([[0.0, 1], [0, 0]])), [[1, 1], [0, 1]],
                       rtol=0, atol=1e-16)


def test_oracle_agrees_with_scipy(rng):
    M = rng.standard_normal((30, 30))
    assert rel_inf_error(dense_expm_oracle(M), scipy.linalg.expm(M)) <= 1e-11


def test_oracle_rejects_nonsquare():
    with pytest.raises(ValueError):
        dense_expm_oracle(np.ones((2, 3)))


def test_dense_truncation_examples(rng):
    assert np.array_equal(dense_truncation(LaurentSeries.constant(1.0), None, 2), np.eye(2))
    alpha = 1.5
    D = dense_truncation(LaurentSeries([1.0, alpha, 1.0], -1), None, 3)
    assert np.array_equal(D, [[alpha, 1, 0], [1, alpha, 1], [0, 1, alpha]])
    a, E = random_symbol(rng), random_correction(rng)
    assert np.array_equal(dense_truncation(a, E, 12), QTMatrix(a, E).dense(12))
    with pytest.raises(ValueError):
        dense_truncation(a, E, 0)


def test_zero_corner_dtype():
    A = FiniteQTMatrix(4, TRID, LowRankCorrection.zero(), LowRankCorrection.zero())
    assert A.dense().dtype == np.float64
