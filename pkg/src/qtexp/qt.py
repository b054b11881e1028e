"""Quasi-Toeplitz matrices ``A = T(a) + E`` and their ring operations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lowrank import (
    DEFAULT_EPS,
    LowRankCorrection,
    compress,
    hankel_apply,
    hankel_factorize,
    hcat,
    pad_rows,
    toeplitz_apply,
)
from .symbol import (
    LaurentSeries,
    sym_add,
    sym_mul,
    sym_reverse,
    sym_scale,
    sym_split,
    sym_truncate,
    wiener_norm,
)

__all__ = [
    "QTMatrix",
    "qt_add",
    "qt_mul",
    "qt_square",
    "qt_scale",
    "qt_dense_block",
    "toeplitz_block",
    "hankel_product_factors",
]


@dataclass(frozen=True, eq=False)
class QTMatrix:
    """Semi-infinite quasi-Toeplitz matrix ``T(symbol) + correction``."""

    symbol: LaurentSeries
    correction: LowRankCorrection = field(default_factory=LowRankCorrection.zero)

    @classmethod
    def identity(cls) -> "QTMatrix":
        return cls(LaurentSeries.constant(1.0))

    @classmethod
    def toeplitz(cls, coeffs, lo: int = 0) -> "QTMatrix":
        return cls(LaurentSeries(coeffs, lo))

    def dense(self, m: int, n: int | None = None) -> np.ndarray:
        return qt_dense_block(self, m, m if n is None else n)

    def __add__(self, other):
        return qt_add(self, other)

    def __matmul__(self, other):
        return qt_mul(self, other)

    def __neg__(self):
        return qt_scale(self, -1)


def toeplitz_block(a: LaurentSeries, m: int, n: int) -> np.ndarray:
    """Leading ``m x n`` block of ``T(a)``, ``t_ij = a_{j-i}``."""
    col = a.window(-(m - 1), n - 1)  # a_{-(m-1)} .. a_{n-1}
    i = np.arange(m)[:, None]
    j = np.arange(n)[None, :]
    return col[j - i + m - 1]


def qt_dense_block(A: QTMatrix, m: int, n: int) -> np.ndarray:
    """Leading ``m x n`` block of ``T(a) + E``."""
    if m < 1 or n < 1:
        raise ValueError("block dimensions must be positive")
    T = toeplitz_block(A.symbol, m, n)
    E = A.correction.dense(m, n)
    return T + E if np.any(E) else T.astype(np.result_type(T, E))


def padded_inner(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``X^T Y`` for factors with implicitly zero trailing rows."""
    m = min(X.shape[0], Y.shape[0])
    return X[:m].T @ Y[:m]


def padded_sum(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    m = max(X.shape[0], Y.shape[0])
    return pad_rows(X, m) + pad_rows(Y, m)


def qt_scale(A: QTMatrix, c: complex) -> QTMatrix:
    return QTMatrix(sym_scale(A.symbol, c), A.correction.scaled(c))


def _finish(symbol, U, V, eps, trunc):
    if trunc:
        symbol = sym_truncate(symbol, trunc * max(wiener_norm(symbol), 1e-300))
    if eps is None:
        return QTMatrix(symbol, LowRankCorrection(U, V))
    return QTMatrix(symbol, LowRankCorrection(*compress(U, V, eps)))


def qt_add(A: QTMatrix, B: QTMatrix, eps: float | None = DEFAULT_EPS) -> QTMatrix:
    """``A + B``; the correction is recompressed unless ``eps`` is None."""
    symbol = sym_add(A.symbol, B.symbol)
    Ea, Eb = A.correction, B.correction
    if Ea.is_zero and Eb.is_zero:
        return QTMatrix(symbol, LowRankCorrection.zero(np.result_type(Ea.dtype, Eb.dtype)))
    if Ea.is_zero or Eb.is_zero:
        E = Eb if Ea.is_zero else Ea
        return _finish(symbol, E.U, E.V, eps, None)
    return _finish(symbol, hcat(Ea.U, Eb.U), hcat(Ea.V, Eb.V), eps, None)


def hankel_product_factors(a_minus: LaurentSeries, b_plus: LaurentSeries,
                           eps: float = DEFAULT_EPS,
                           factors: LowRankCorrection | None = None):
    """Factors ``(X, Y)`` with ``X Y^T = H(a_minus) H(b_plus)``.

    The Hankel matrix of smaller degree is factored (``H = U V^T``) and the
    other one is applied with a structured product.  Passing ``factors``
    (a factorization of ``H(a_minus)``) skips the factorization.
    """
    da, db = max(a_minus.hi, 0), max(b_plus.hi, 0)
    if da == 0 or db == 0:
        return None
    if factors is not None or da <= db:
        H = factors if factors is not None else hankel_factorize(a_minus, eps)
        if H.is_zero:
            return None
        # U V^T H(b) = U (H(b) V)^T since Hankel matrices are symmetric
        return H.U, hankel_apply(b_plus, H.V)
    H = hankel_factorize(b_plus, eps)
    if H.is_zero:
        return None
    return hankel_apply(a_minus, H.U), H.V


def qt_mul(A: QTMatrix, B: QTMatrix, eps: float | None = DEFAULT_EPS,
           trunc: float | None = None) -> QTMatrix:
    """Product ``A B`` of two QT matrices.

    ``T(a)T(b) = T(ab) - H(a_-)H(b_+)`` plus the cross terms
    ``T(a) E_b + E_a T(b) + E_a E_b``, all kept in factored form.

    Parameters
    ----------
    eps : float or None
        Compression threshold; ``None`` returns the raw concatenated factors.
    trunc : float, optional
        Relative Wiener-norm threshold for truncating the product symbol.
    """
    a, b = A.symbol, B.symbol
    Ea, Eb = A.correction, B.correction
    symbol = sym_mul(a, b)
    a_minus, _, _ = sym_split(a)
    _, _, b_plus = sym_split(b)
    ublocks, vblocks = [], []
    hh = hankel_product_factors(a_minus, b_plus, DEFAULT_EPS if eps is None else eps)
    if hh is not None:
        ublocks.append(-hh[0])
        vblocks.append(hh[1])
    if not Eb.is_zero:
        left = toeplitz_apply(a, Eb.U)
        if not Ea.is_zero:
            left = padded_sum(left, Ea.U @ padded_inner(Ea.V, Eb.U))
        ublocks.append(left)
        vblocks.append(Eb.V)
    if not Ea.is_zero:
        ublocks.append(Ea.U)
        vblocks.append(toeplitz_apply(sym_reverse(b), Ea.V))
    if not ublocks:
        dtype = np.result_type(a.coeffs, b.coeffs)
        return _finish(symbol, np.zeros((0, 0), dtype), np.zeros((0, 0), dtype),
                       None, trunc)
    return _finish(symbol, hcat(*ublocks), hcat(*vblocks), eps, trunc)


def qt_square(A: QTMatrix, eps: float | None = DEFAULT_EPS,
              trunc: float | None = None,
              hankel: LowRankCorrection | None = None) -> QTMatrix:
    """``A^2`` in one structured pass.

    With ``E = W Y^T`` and ``H(a_-) H(a_+) = X Z^T`` the new correction is
    ``[-X | T(a)W | W] [Z | Y | T(a)^T Y + Y (W^T Y)]^T``.

    Parameters
    ----------
    hankel : LowRankCorrection, optional
        Precomputed factorization of ``H(a_-)``.
    """
    a = A.symbol
    E = A.correction
    symbol = sym_mul(a, a)
    a_minus, _, a_plus = sym_split(a)
    ublocks, vblocks = [], []
    hh = hankel_product_factors(a_minus, a_plus, DEFAULT_EPS if eps is None else eps,
                                factors=hankel)
    if hh is not None:
        ublocks.append(-hh[0])
        vblocks.append(hh[1])
    if not E.is_zero:
        W, Y = E.U, E.V
        ublocks += [toeplitz_apply(a, W), W]
        vblocks += [Y, padded_sum(toeplitz_apply(sym_reverse(a), Y),
                                  Y @ padded_inner(W, Y))]
    if not ublocks:
        dtype = a.coeffs.dtype
        return _finish(symbol, np.zeros((0, 0), dtype), np.zeros((0, 0), dtype),
                       None, trunc)
    return _finish(symbol, hcat(*ublocks), hcat(*vblocks), eps, trunc)
