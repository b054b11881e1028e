"""Finitely supported low-rank corrections and structured products.

A correction ``E = U @ V.T`` (plain transpose, never conjugated) is stored as
two tall-thin factors whose rows past ``U.shape[0]`` / ``V.shape[0]`` are
implicitly zero.  Rows are 0-based here: ``E[i, j]`` is entry ``(i+1, j+1)``
of the semi-infinite matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.signal

from .symbol import UNIT_ROUNDOFF, LaurentSeries

__all__ = [
    "LowRankCorrection",
    "toeplitz_apply",
    "hankel_apply",
    "hankel_block",
    "hankel_factorize",
    "compress",
    "trim_rows",
    "correction_fnorm",
    "correction_add",
    "correction_entry",
    "correction_numerical_rank",
    "correction_singular_values",
    "compress_correction",
    "hcat",
    "pad_rows",
    "DEFAULT_EPS",
]

DEFAULT_EPS = UNIT_ROUNDOFF

# below this many output rows direct convolution is used
_DIRECT_CONV_MAX = 64


def _matrix(x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim == 1:
        x = x[:, None]
    if np.iscomplexobj(x):
        return x.astype(np.complex128)
    return x.astype(np.float64)


def trim_rows(x: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Drop trailing rows whose inf-norm is at most ``eps`` times the largest."""
    if x.size == 0:
        return x[:0]
    norms = np.max(np.abs(x), axis=1)
    top = norms.max()
    if top == 0:
        return x[:0]
    keep = np.flatnonzero(norms > eps * top)
    return x[:keep[-1] + 1]


def pad_rows(x: np.ndarray, m: int) -> np.ndarray:
    if x.shape[0] >= m:
        return x
    return np.vstack([x, np.zeros((m - x.shape[0], x.shape[1]), dtype=x.dtype)])


def hcat(*blocks: np.ndarray) -> np.ndarray:
    """Concatenate column blocks, zero-padding every block to the longest."""
    m = max(b.shape[0] for b in blocks)
    dtype = np.result_type(*blocks)
    return np.hstack([pad_rows(b, m).astype(dtype, copy=False) for b in blocks])


@dataclass(frozen=True, eq=False)
class LowRankCorrection:
    """Semi-infinite matrix ``E = U V^T`` with finitely many nonzero rows.

    Parameters
    ----------
    U : array_like, shape (m_u, r)
    V : array_like, shape (m_v, r)
    """

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U, V = _matrix(self.U), _matrix(self.V)
        if U.shape[1] != V.shape[1]:
            raise ValueError(
                f"factor column counts differ: {U.shape[1]} != {V.shape[1]}")
        if U.shape[1] == 0:
            U, V = U[:0], V[:0]
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @classmethod
    def zero(cls, dtype=float) -> "LowRankCorrection":
        return cls(np.zeros((0, 0), dtype=dtype), np.zeros((0, 0), dtype=dtype))

    @classmethod
    def from_dense(cls, block, eps: float = DEFAULT_EPS) -> "LowRankCorrection":
        """Factor a finite leading block (the rest of the matrix is zero)."""
        block = _matrix(block)
        if block.size == 0 or not np.any(block):
            return cls.zero(block.dtype)
        u, s, vh = scipy.linalg.svd(block, full_matrices=False)
        r = int(np.count_nonzero(s >= eps * s[0]))
        root = np.sqrt(s[:r])
        return cls(trim_rows(u[:, :r] * root, 0), trim_rows(vh[:r].T * root, 0))

    @property
    def rank(self) -> int:
        """Number of factor columns (an upper bound on the true rank)."""
        return self.U.shape[1]

    @property
    def rows(self) -> int:
        return self.U.shape[0]

    @property
    def cols(self) -> int:
        return self.V.shape[0]

    @property
    def dtype(self):
        return np.result_type(self.U, self.V)

    @property
    def is_zero(self) -> bool:
        return self.rank == 0 or self.rows == 0 or self.cols == 0

    def dense(self, m: int | None = None, n: int | None = None) -> np.ndarray:
        """Leading ``m x n`` block (defaults to the active block)."""
        m = self.rows if m is None else m
        n = self.cols if n is None else n
        out = np.zeros((m, n), dtype=self.dtype)
        mu, mv = min(m, self.rows), min(n, self.cols)
        if self.rank and mu and mv:
            out[:mu, :mv] = self.U[:mu] @ self.V[:mv].T
        return out

    def scaled(self, c: complex) -> "LowRankCorrection":
        return LowRankCorrection(self.U * c, self.V)

    def transpose(self) -> "LowRankCorrection":
        return LowRankCorrection(self.V, self.U)

    def trimmed(self, eps: float = DEFAULT_EPS) -> "LowRankCorrection":
        return LowRankCorrection(trim_rows(self.U, eps), trim_rows(self.V, eps))

    def __add__(self, other):
        return correction_add(self, other)

    def __neg__(self):
        return self.scaled(-1)


def _conv_columns(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Full linear convolution of vector ``c`` with every column of ``x``."""
    if c.size == 0 or x.shape[0] == 0:
        return np.zeros((max(c.size + x.shape[0] - 1, 0), x.shape[1]),
                        dtype=np.result_type(c, x))
    if c.size + x.shape[0] - 1 <= _DIRECT_CONV_MAX or c.size <= 8:
        out = np.zeros((c.size + x.shape[0] - 1, x.shape[1]),
                       dtype=np.result_type(c, x))
        for k, ck in enumerate(c):
            if ck:
                out[k:k + x.shape[0]] += ck * x
        return out
    out = scipy.signal.fftconvolve(c[:, None], x, axes=0)
    if not (np.iscomplexobj(c) or np.iscomplexobj(x)):
        out = out.real
    return out


def toeplitz_apply(a: LaurentSeries, X) -> np.ndarray:
    """Nonzero part of ``T(a) @ X`` for ``X`` with finitely many rows.

    Returns the leading ``m + n_minus`` rows (``m`` rows of ``X``); all
    further rows of the product are exactly zero.
    """
    X = _matrix(X)
    m = X.shape[0]
    out_rows = m + a.n_minus
    if m == 0:
        return np.zeros((0, X.shape[1]), dtype=np.result_type(a.coeffs, X))
    # row i of T(a) X is sum_j a_{j-i} X_j: convolve with c_k = a_{-k}
    # c runs over k = -hi .. -lo, so the full result starts at index -hi
    full = _conv_columns(a.coeffs[::-1], X)
    start = a.hi
    out = full[start:start + out_rows]
    return pad_rows(out, out_rows)


def hankel_apply(b_plus: LaurentSeries, X) -> np.ndarray:
    """``H(b_plus) @ X`` restricted to its ``d = deg(b_plus)`` active rows.

    Entry ``(i, j)`` of ``H(b)`` (0-based) is ``b_{i+j+1}``; only nonnegative
    powers of ``b_plus`` are read and its constant term is ignored.
    """
    X = _matrix(X)
    d = max(b_plus.hi, 0)
    dtype = np.result_type(b_plus.coeffs, X)
    if d == 0 or X.shape[0] == 0:
        return np.zeros((0, X.shape[1]), dtype=dtype)
    X = X[:d]
    m = X.shape[0]
    b = b_plus.window(0, d)
    # out[i] = sum_j b_{i+j+1} X_j = (b * X[::-1])[i + m]
    full = _conv_columns(b, X[::-1])
    return pad_rows(full[m:m + d], d)


def hankel_block(b_plus: LaurentSeries, d: int | None = None) -> np.ndarray:
    """Dense leading ``d x d`` block of ``H(b_plus)``."""
    d = max(b_plus.hi, 0) if d is None else d
    b = b_plus.window(0, 2 * d + 1)
    i = np.arange(d)
    return b[i[:, None] + i[None, :] + 1]


def hankel_factorize(b_plus: LaurentSeries, eps: float = DEFAULT_EPS) -> LowRankCorrection:
    """Low-rank factors ``U V^T`` of the Hankel matrix ``H(b_plus)``.

    Uses the SVD of the dense ``d x d`` leading block and keeps singular
    values ``>= eps * sigma_1``; both factors carry ``sqrt(sigma)``.
    """
    d = max(b_plus.hi, 0)
    if d == 0:
        return LowRankCorrection.zero(b_plus.coeffs.dtype)
    return LowRankCorrection.from_dense(hankel_block(b_plus, d), eps)


def _pivoted_qr(X: np.ndarray, eps: float):
    """Truncated ``X[:, piv] = Q R``; returns ``Q_hat`` and ``R_hat`` unpermuted."""
    Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0:
        return Q[:, :0], R[:0]
    h = int(np.flatnonzero(diag >= eps * diag[0])[-1]) + 1
    R_unperm = np.empty((h, X.shape[1]), dtype=R.dtype)
    R_unperm[:, piv] = R[:h]
    return Q[:, :h], R_unperm


def compress(F, G, eps: float = DEFAULT_EPS, trim: float | None = None):
    """Reduce the inner dimension of ``F @ G.T``.

    Pivoted QR of both factors, truncation of the negligible trailing rows of
    the triangular factors, then an SVD of the small middle matrix truncated
    at ``eps * sigma_1``.  The output satisfies
    ``||F G^T - Ft Gt^T||_2 <= gamma * eps * ||F||_2 ||G||_2`` with a modest
    ``gamma`` depending on the numerical rank.

    Parameters
    ----------
    F : ndarray, shape (m, k)
    G : ndarray, shape (n, k)
    eps : float
        Relative threshold for both truncations.
    trim : float, optional
        Threshold for dropping trailing negligible rows of the results
        (defaults to ``eps``).

    Returns
    -------
    Ft : ndarray, shape (m', kt)
    Gt : ndarray, shape (n', kt)
        With ``kt <= k`` and ``m' <= m``, ``n' <= n`` after row trimming.
    """
    F, G = _matrix(F), _matrix(G)
    if F.shape[1] != G.shape[1]:
        raise ValueError("F and G must have the same number of columns")
    trim = eps if trim is None else trim
    dtype = np.result_type(F, G)
    empty = (np.zeros((0, 0), dtype=dtype), np.zeros((0, 0), dtype=dtype))
    if F.shape[1] == 0 or F.shape[0] == 0 or G.shape[0] == 0:
        return empty
    Qf, Rf = _pivoted_qr(F, eps)
    Qg, Rg = _pivoted_qr(G, eps)
    if Rf.shape[0] == 0 or Rg.shape[0] == 0:
        return empty
    u, s, vh = scipy.linalg.svd(Rf @ Rg.T, full_matrices=False)
    if s[0] == 0:
        return empty
    ell = int(np.count_nonzero(s >= eps * s[0]))
    root = np.sqrt(s[:ell])
    Ft = Qf @ (u[:, :ell] * root)
    Gt = Qg @ (vh[:ell].T * root)
    return trim_rows(Ft, trim), trim_rows(Gt, trim)


def compress_correction(E: LowRankCorrection, eps: float = DEFAULT_EPS,
                        trim: float | None = None) -> LowRankCorrection:
    return LowRankCorrection(*compress(E.U, E.V, eps, trim))


def correction_add(E1: LowRankCorrection, E2: LowRankCorrection) -> LowRankCorrection:
    """Sum of two corrections by factor concatenation (no compression)."""
    if E1.is_zero:
        return E2
    if E2.is_zero:
        return E1
    return LowRankCorrection(hcat(E1.U, E2.U), hcat(E1.V, E2.V))


def correction_fnorm(E: LowRankCorrection) -> float:
    """Entrywise absolute sum ``sum_{i,j} |e_ij|`` over the active block."""
    if E.is_zero:
        return 0.0
    return float(np.sum(np.abs(E.U @ E.V.T)))


def correction_entry(E: LowRankCorrection, i: int, j: int):
    """Entry ``(i, j)`` with 1-based indices."""
    if i < 1 or j < 1:
        raise IndexError("indices are 1-based")
    if E.is_zero or i > E.rows or j > E.cols:
        return E.dtype.type(0)
    return E.U[i - 1] @ E.V[j - 1]


def correction_singular_values(E: LowRankCorrection) -> np.ndarray:
    if E.is_zero:
        return np.zeros(0)
    ru = scipy.linalg.qr(E.U, mode="economic")[1]
    rv = scipy.linalg.qr(E.V, mode="economic")[1]
    return scipy.linalg.svdvals(ru @ rv.T)


def correction_numerical_rank(E: LowRankCorrection, eps: float = DEFAULT_EPS) -> int:
    """Number of singular values of ``U V^T`` that are ``>= eps * sigma_1``."""
    s = correction_singular_values(E)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s >= eps * s[0]))
