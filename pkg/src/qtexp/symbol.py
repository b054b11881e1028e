"""Laurent-series symbols with finitely many stored coefficients.

A symbol ``a(z) = sum_i a_i z^i`` is stored as a dense coefficient window
``coeffs[k] = a_{lo + k}`` with ``lo <= 0 <= hi``.  Everything here is a pure
function of immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.signal

__all__ = [
    "LaurentSeries",
    "SymbolConvergenceError",
    "wiener_norm",
    "derivative_wiener_norm",
    "sym_add",
    "sym_scale",
    "sym_mul",
    "sym_split",
    "sym_truncate",
    "sym_exp",
    "sym_reverse",
    "numerical_bandwidth",
]

UNIT_ROUNDOFF = np.finfo(float).eps

# below this many output coefficients direct convolution beats the FFT
_DIRECT_CONV_MAX = 64


class SymbolConvergenceError(ArithmeticError):
    """Evaluation-interpolation did not reach the requested tolerance."""


def _as_coeff_array(values) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values))
    if arr.ndim != 1:
        raise ValueError("coefficients must be one-dimensional")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128)
        if not np.any(arr.imag):
            arr = arr.real.copy()
    else:
        arr = arr.astype(np.float64)
    return arr


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Finitely supported Laurent series ``sum_{i=lo}^{hi} a_i z^i``.

    Construction normalizes the window: zero boundary coefficients are
    trimmed, but index 0 always stays addressable.  Coefficients are kept
    real (float64) when they have no imaginary part and complex128 otherwise.

    Parameters
    ----------
    coeffs : array_like
        ``coeffs[k]`` is the coefficient of ``z**(lo + k)``.
    lo : int
        Index of the first stored coefficient, ``lo <= 0``.
    """

    coeffs: np.ndarray
    lo: int = 0

    def __post_init__(self):
        c = _as_coeff_array(self.coeffs)
        lo = int(self.lo)
        if c.size == 0:
            c, lo = np.zeros(1), 0
        if lo > 0:
            c = np.concatenate([np.zeros(lo, dtype=c.dtype), c])
            lo = 0
        if lo + c.size - 1 < 0:
            c = np.concatenate([c, np.zeros(-(lo + c.size - 1), dtype=c.dtype)])
        nz = np.flatnonzero(c)
        zero = -lo
        start = min(nz[0], zero) if nz.size else zero
        stop = max(nz[-1], zero) if nz.size else zero
        c = c[start:stop + 1].copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "lo", lo + int(start))

    @classmethod
    def from_dict(cls, mapping: dict[int, complex]) -> "LaurentSeries":
        """Build a series from ``{power: coefficient}``."""
        if not mapping:
            return cls.zero()
        lo = min(min(mapping), 0)
        hi = max(max(mapping), 0)
        c = np.zeros(hi - lo + 1, dtype=complex)
        for k, v in mapping.items():
            c[k - lo] += v
        return cls(c, lo)

    @classmethod
    def constant(cls, value: complex) -> "LaurentSeries":
        return cls([value], 0)

    @classmethod
    def zero(cls) -> "LaurentSeries":
        return cls([0.0], 0)

    @property
    def hi(self) -> int:
        return self.lo + self.coeffs.size - 1

    @property
    def n_minus(self) -> int:
        """Number of stored strictly negative powers."""
        return -self.lo

    @property
    def n_plus(self) -> int:
        """Number of stored strictly positive powers."""
        return self.hi

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.coeffs)

    def __getitem__(self, i: int):
        if self.lo <= i <= self.hi:
            return self.coeffs[i - self.lo]
        return self.coeffs.dtype.type(0)

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients ``a_lo, ..., a_hi`` (zero-padded outside the store)."""
        out = np.zeros(hi - lo + 1, dtype=self.coeffs.dtype)
        s, e = max(lo, self.lo), min(hi, self.hi)
        if s <= e:
            out[s - lo:e - lo + 1] = self.coeffs[s - self.lo:e - self.lo + 1]
        return out

    def __call__(self, z):
        """Evaluate the Laurent polynomial at ``z`` (nonzero)."""
        z = np.asarray(z, dtype=complex)
        powers = np.arange(self.lo, self.hi + 1)
        return np.sum(self.coeffs * z[..., None] ** powers, axis=-1)

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self.lo == other.lo and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __repr__(self):
        return f"LaurentSeries(lo={self.lo}, hi={self.hi}, coeffs={self.coeffs!r})"

    def __add__(self, other):
        if np.isscalar(other):
            other = LaurentSeries.constant(other)
        return sym_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return sym_scale(self, -1)

    def __sub__(self, other):
        if np.isscalar(other):
            other = LaurentSeries.constant(other)
        return sym_add(self, sym_scale(other, -1))

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            return sym_mul(self, other)
        return sym_scale(self, other)

    def __rmul__(self, other):
        return sym_scale(self, other)

    def __truediv__(self, c):
        return sym_scale(self, 1 / c)


def wiener_norm(a: LaurentSeries) -> float:
    """Sum of the moduli of the coefficients."""
    return float(np.sum(np.abs(a.coeffs)))


def derivative_wiener_norm(a: LaurentSeries) -> float:
    """Wiener norm of the derivative, ``sum_i |i a_i|``."""
    idx = np.arange(a.lo, a.hi + 1)
    return float(np.sum(np.abs(idx * a.coeffs)))


def sym_add(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
    return LaurentSeries(a.window(lo, hi) + b.window(lo, hi), lo)


def sym_scale(a: LaurentSeries, c: complex) -> LaurentSeries:
    return LaurentSeries(a.coeffs * c, a.lo)


def _convolve(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x.size + y.size - 1 <= _DIRECT_CONV_MAX or min(x.size, y.size) <= 8:
        return np.convolve(x, y)
    out = scipy.signal.fftconvolve(x, y)
    if not (np.iscomplexobj(x) or np.iscomplexobj(y)):
        out = out.real
    return out


def sym_mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    """Product of two symbols (coefficient convolution)."""
    return LaurentSeries(_convolve(a.coeffs, b.coeffs), a.lo + b.lo)


def sym_split(a: LaurentSeries) -> tuple[LaurentSeries, complex, LaurentSeries]:
    """Split ``a(z) = a_0 + a_plus(z) + a_minus(1/z)``.

    Both ``a_minus`` and ``a_plus`` are returned as power series in ``z``
    with zero constant term; ``a_minus`` holds ``a_{-i}`` at ``z**i``.
    """
    zero = -a.lo
    minus = np.concatenate([[0], a.coeffs[:zero][::-1]])
    plus = np.concatenate([[0], a.coeffs[zero + 1:]])
    return (LaurentSeries(minus.astype(a.coeffs.dtype), 0), a.coeffs[zero],
            LaurentSeries(plus.astype(a.coeffs.dtype), 0))


def sym_reverse(a: LaurentSeries) -> LaurentSeries:
    """The symbol ``a(1/z)``; ``T(a).T == T(sym_reverse(a))``."""
    return LaurentSeries(a.coeffs[::-1], -a.hi)


def sym_truncate(a: LaurentSeries, eps: float) -> LaurentSeries:
    """Drop tail coefficients while their accumulated modulus stays <= eps.

    Coefficients are removed from whichever end currently holds the smaller
    modulus, so the result has the smallest window reachable this way.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    mod = np.abs(a.coeffs)
    # keep a few ulps of headroom so the dropped mass, however it is summed
    # afterwards, never exceeds eps
    if math.fsum(mod) <= eps:
        return LaurentSeries.zero()
    budget = eps * (1 - 8 * UNIT_ROUNDOFF)
    left, right = 0, mod.size - 1
    dropped = 0.0
    while left <= right:
        if mod[left] <= mod[right]:
            if dropped + mod[left] > budget:
                break
            dropped += mod[left]
            left += 1
        else:
            if dropped + mod[right] > budget:
                break
            dropped += mod[right]
            right -= 1
    c = np.zeros_like(a.coeffs)
    c[left:right + 1] = a.coeffs[left:right + 1]
    return LaurentSeries(c, a.lo)


def _next_pow2(n: int) -> int:
    return 1 << max(int(n) - 1, 0).bit_length()


def _exp_on_grid(a: LaurentSeries, n: int) -> tuple[np.ndarray, int]:
    """Coefficients of exp(a) aliased onto ``n`` slots, with their lowest index."""
    width = a.hi - a.lo
    neg = int(math.ceil((n - 1) * (-a.lo) / width)) if width else 0
    x = np.zeros(n, dtype=complex)
    idx = np.arange(a.lo, a.hi + 1) % n
    np.add.at(x, idx, a.coeffs)
    vals = np.exp(scipy.fft.fft(x))
    b = scipy.fft.ifft(vals)
    b = np.roll(b, neg)
    return b, -neg


def sym_exp(a: LaurentSeries, tol: float = 1e-14, growth: int = 8,
            max_points: int = 1 << 22) -> LaurentSeries:
    """Coefficients of ``exp(a(z))`` by evaluation and interpolation.

    ``a`` is sampled at ``N``-th roots of unity with an FFT, exponentiated
    pointwise and transformed back.  ``N`` starts at the next power of two
    above ``growth`` times the input window and doubles until the boundary
    coefficients of the output window are below ``tol * ||b|| / N`` (or the
    round-off floor ``4 eps ||b||``, whichever is larger) and two
    successive grids, each truncated at ``tol / 2`` relative to its norm,
    agree to ``tol * ||b||`` in the Wiener norm.

    Parameters
    ----------
    a : LaurentSeries
    tol : float
        Relative accuracy in the Wiener norm.
    growth : int
        Initial ratio between output and input window widths.
    max_points : int
        Largest grid tried before giving up.

    Raises
    ------
    SymbolConvergenceError
        If the grid reaches ``max_points`` without meeting ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a.lo == a.hi:
        return LaurentSeries.constant(np.exp(a.coeffs[0]))
    real = a.is_real
    n = _next_pow2(growth * (a.hi - a.lo + 1))
    prev = None
    while n <= max_points:
        b, lo = _exp_on_grid(a, n)
        scale = np.sum(np.abs(b))
        edge = max(1, n // 64)
        # tol / n cannot be certified below the FFT round-off floor
        tiny = max(tol / n, 4 * UNIT_ROUNDOFF) * scale
        # a one-sided symbol has a one-sided exponential: the window then
        # starts (or ends) at index 0 and that edge needs no check
        lower_ok = a.lo == 0 or np.max(np.abs(b[:edge])) <= tiny
        upper_ok = a.hi == 0 or np.max(np.abs(b[-edge:])) <= tiny
        if prev is not None and lower_ok and upper_ok:
            out = sym_truncate(LaurentSeries(b.real if real else b, lo),
                               0.5 * tol * scale)
            if wiener_norm(out - prev) <= tol * scale:
                return out
        prev = sym_truncate(LaurentSeries(b.real if real else b, lo),
                            0.5 * tol * scale)
        n *= 2
    raise SymbolConvergenceError(
        f"exp of symbol did not converge to tol={tol:g} with {max_points} points")


def numerical_bandwidth(b: LaurentSeries, eps: float = UNIT_ROUNDOFF) -> int:
    """Number of coefficients with ``|b_i| > eps * max_j |b_j|``."""
    mod = np.abs(b.coeffs)
    top = mod.max()
    if top == 0:
        return 0
    return int(np.count_nonzero(mod > eps * top))
