"""Finite ``n x n`` quasi-Toeplitz matrices with two corner corrections.

``A = T_n(a) + NW + J SE J`` where ``NW`` lives in the north-west corner and
``SE`` is stored in flipped coordinates (its entry ``(i, j)`` sits at
``(n-1-i, n-1-j)``).  Since ``J T_n(a) J = T_n(a(1/z))``, the south-east
corner evolves exactly like a north-west corner of the reversed symbol.

The module also holds the dense reference exponential used by all
verification code.  It shares no code with the structured path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expm import (
    ExpmInfo,
    _taylor_stage,
    _taylor_terms,
    scaling_exponent,
)
from .lowrank import DEFAULT_EPS, LowRankCorrection, compress_correction, correction_fnorm
from .qt import QTMatrix, qt_square, toeplitz_block
from .symbol import LaurentSeries, sym_exp, sym_reverse, sym_scale, wiener_norm

__all__ = [
    "FiniteQTMatrix",
    "CornerOverlapError",
    "finite_square",
    "finite_expm",
    "dense_expm_oracle",
    "dense_truncation",
]


class CornerOverlapError(ValueError):
    """The two corner corrections would share rows or columns."""


@dataclass(frozen=True, eq=False)
class FiniteQTMatrix:
    """``T_n(symbol) + nw + J se J`` of size ``n``."""

    n: int
    symbol: LaurentSeries
    nw: LowRankCorrection = field(default_factory=LowRankCorrection.zero)
    se: LowRankCorrection = field(default_factory=LowRankCorrection.zero)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        check_corners(self.n, self.nw, self.se)

    def dense(self) -> np.ndarray:
        n = self.n
        out = toeplitz_block(self.symbol, n, n).astype(
            np.result_type(self.symbol.coeffs, self.nw.dtype, self.se.dtype))
        out += self.nw.dense(n, n)
        out += self.se.dense(n, n)[::-1, ::-1]
        return out

    def northwest(self) -> QTMatrix:
        return QTMatrix(self.symbol, self.nw)

    def southeast(self) -> QTMatrix:
        """The flipped south-east corner as a semi-infinite QT matrix."""
        return QTMatrix(sym_reverse(self.symbol), self.se)


def check_corners(n: int, nw: LowRankCorrection, se: LowRankCorrection) -> None:
    """Raise if the corner supports (or their products) could interact."""
    if nw.rows > n or nw.cols > n or se.rows > n or se.cols > n:
        raise CornerOverlapError("corner correction larger than the matrix")
    if nw.is_zero or se.is_zero:
        return
    span_nw = max(nw.rows, nw.cols)
    span_se = max(se.rows, se.cols)
    if span_nw + span_se > n:
        raise CornerOverlapError(
            f"corner supports {span_nw} + {span_se} exceed n={n}")


def finite_square(A: FiniteQTMatrix, eps: float = DEFAULT_EPS,
                  trunc: float | None = None) -> FiniteQTMatrix:
    """``A^2`` with both corners updated independently.

    The north-west corner gets ``-H_n(a_-)H_n(a_+)`` plus its own cross
    terms, the south-east one the flipped analogue ``-H_n(a_+)H_n(a_-)``.

    Raises
    ------
    CornerOverlapError
        If ``n <= n_minus + n_plus`` for the symbol of ``A`` or the squared
        corners are no longer disjoint.
    """
    width = A.symbol.n_minus + A.symbol.n_plus
    if A.n <= width:
        raise CornerOverlapError(f"n={A.n} must exceed n_minus + n_plus = {width}")
    nw = qt_square(A.northwest(), eps, trunc)
    se = qt_square(A.southeast(), eps, trunc)
    return FiniteQTMatrix(A.n, nw.symbol, nw.correction, se.correction)


def finite_expm(A: FiniteQTMatrix, tol: float = 1e-13, eps: float = DEFAULT_EPS,
                scaling: int | None = None, max_terms: int = 200,
                full_output: bool = False):
    """Exponential of a finite two-corner QT matrix.

    Runs the Taylor stage once per corner (the south-east one with the
    reversed symbol), then squares with :func:`finite_square`, which checks
    that the corners stay apart.  The final Toeplitz part is ``T_n`` of the
    evaluation-interpolation exponential of the symbol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    info = ExpmInfo()
    a = A.symbol
    xi = wiener_norm(a) + max(correction_fnorm(A.nw), correction_fnorm(A.se))
    info.xi = xi
    n = A.n
    if xi == 0:
        result = FiniteQTMatrix(n, LaurentSeries.constant(1.0))
        return (result, info) if full_output else result
    q = scaling_exponent(xi) if scaling is None else int(scaling)
    info.q = q
    c = 2.0 ** -q
    n_terms = _taylor_terms(xi * c, tol / 2 ** (q + 1), max_terms)
    info.terms = n_terms
    trunc = tol / (4 * n_terms)
    a_s = sym_scale(a, c)
    nw = _taylor_stage(QTMatrix(a_s, A.nw.scaled(c)), n_terms, eps, trunc)
    se = _taylor_stage(QTMatrix(sym_reverse(a_s), A.se.scaled(c)), n_terms, eps, trunc)
    X = FiniteQTMatrix(n, nw.s, nw.accum, se.accum)
    for _ in range(q):
        X = finite_square(X, eps, trunc=tol / (4 * (q + 1)))
    b = sym_exp(a, tol)
    nb = wiener_norm(b)
    info.symbol_discrepancy = wiener_norm(b - X.symbol) / nb if nb else 0.0
    result = FiniteQTMatrix(n, b, compress_correction(X.nw, eps, trim=tol),
                            compress_correction(X.se, eps, trim=tol))
    return (result, info) if full_output else result


def dense_expm_oracle(M, tol: float = 1e-16) -> np.ndarray:
    """Dense scaling-and-squaring Taylor exponential (reference path).

    Scales ``M`` by ``2**-s`` so that ``||M||_1 / 2**s <= 1/2``, sums the
    Taylor series until the tail bound ``sum_{i>k} x^i / i!`` drops below
    ``tol``, then squares ``s`` times.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be square")
    dtype = np.result_type(M, np.float64)
    n = M.shape[0]
    eye = np.eye(n, dtype=dtype)
    norm = np.abs(M).sum(axis=0).max() if n else 0.0
    if norm == 0:
        return eye
    s = max(0, math.ceil(math.log2(norm)) + 1)
    X = M / 2.0 ** s
    x = norm / 2.0 ** s
    result = eye.copy()
    term = eye
    k = 0
    # tail after degree k is at most x^(k+1)/(k+1)! * 1/(1-x) for x <= 1/2
    while True:
        k += 1
        term = term @ X / k
        result = result + term
        tail = x ** (k + 1) / math.factorial(k + 1) * 2.0
        if tail <= tol:
            break
    for _ in range(s):
        result = result @ result
    return result


def dense_truncation(a: LaurentSeries, E: LowRankCorrection | None, N: int) -> np.ndarray:
    """Leading ``N x N`` section of ``T(a) + E``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    out = toeplitz_block(a, N, N)
    if E is not None and not E.is_zero:
        out = out + E.dense(N, N)
    return out
