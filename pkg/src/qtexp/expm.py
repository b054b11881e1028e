"""Exponential and powers of quasi-Toeplitz matrices.

The Taylor partial sums ``S_k = sum_{i<=k} A^i / i!`` are carried as
``T(s_k) + F_k``, where the symbol part follows ``p_i = a p_{i-1} / i`` and
the correction part follows the low-rank recurrences for ``E_i / i!``
(Toeplitz input) or ``D_i / i!`` (input with a correction).  Scaling and
squaring keeps the number of terms small.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .lowrank import (
    DEFAULT_EPS,
    LowRankCorrection,
    compress,
    correction_fnorm,
    correction_numerical_rank,
    hankel_apply,
    hankel_factorize,
    hcat,
    toeplitz_apply,
)
from .qt import QTMatrix, padded_inner, padded_sum, qt_square
from .symbol import (
    LaurentSeries,
    derivative_wiener_norm,
    sym_add,
    sym_exp,
    sym_mul,
    sym_reverse,
    sym_scale,
    sym_split,
    sym_truncate,
    wiener_norm,
)

__all__ = [
    "TaylorState",
    "BoundReport",
    "ExpmInfo",
    "ExpmConvergenceError",
    "taylor_step",
    "taylor_step_general",
    "remainder_bound",
    "scaling_exponent",
    "qt_expm",
    "qt_pow",
    "bounds_report",
]

logger = logging.getLogger(__name__)


class ExpmConvergenceError(ArithmeticError):
    """The Taylor loop needed more terms than allowed."""


@dataclass(frozen=True)
class TaylorState:
    """Iteration state after ``i`` Taylor steps.

    ``p`` is ``a^i / i!``, ``s`` the partial sum of the ``p``'s, ``term`` the
    current correction term (``E_i / i!`` or ``D_i / i!``) and ``accum`` the
    running correction ``F_i``.
    """

    i: int
    p: LaurentSeries
    s: LaurentSeries
    term: LowRankCorrection
    accum: LowRankCorrection

    @classmethod
    def initial(cls) -> "TaylorState":
        one = LaurentSeries.constant(1.0)
        return cls(0, one, one, LowRankCorrection.zero(), LowRankCorrection.zero())


def _next_symbols(state: TaylorState, a: LaurentSeries, k: int, trunc):
    p = sym_scale(sym_mul(a, state.p), 1.0 / k)
    if trunc:
        p = sym_truncate(p, trunc * wiener_norm(state.s))
    s = sym_add(state.s, p)
    if trunc:
        s = sym_truncate(s, trunc * wiener_norm(s))
    return p, s


def _accumulate(state: TaylorState, U, V, eps) -> tuple[LowRankCorrection, LowRankCorrection]:
    term = LowRankCorrection(*compress(U, V, eps))
    if term.is_zero:
        return term, state.accum
    if state.accum.is_zero:
        return term, term
    W = hcat(state.accum.U, term.U)
    Y = hcat(state.accum.V, term.V)
    return term, LowRankCorrection(*compress(W, Y, eps))


def taylor_step(state: TaylorState, a: LaurentSeries, hankel_factors: LowRankCorrection,
                eps: float = DEFAULT_EPS, trunc: float | None = None) -> TaylorState:
    """One step of the Taylor recurrence for ``exp(T(a))``.

    Parameters
    ----------
    state : TaylorState
        State at index ``k - 1``.
    a : LaurentSeries
        The (scaled) symbol.
    hankel_factors : LowRankCorrection
        ``U V^T`` approximating ``H(a_-)``.
    eps : float
        Compression threshold.
    trunc : float, optional
        Relative Wiener-norm threshold for truncating ``p_k`` and ``s_k``.
    """
    k = state.i + 1
    _, _, p_plus = sym_split(state.p)
    Uk, Vk = state.term.U, state.term.V
    U, V = hankel_factors.U, hankel_factors.V
    ublocks, vblocks = [], []
    if not state.term.is_zero:
        ublocks.append(toeplitz_apply(a, Uk))
        vblocks.append(Vk / k)
    if not hankel_factors.is_zero and p_plus.hi > 0:
        ublocks.append(U)
        vblocks.append(-hankel_apply(p_plus, V) / k)
    if ublocks:
        term, accum = _accumulate(state, hcat(*ublocks), hcat(*vblocks), eps)
    else:
        term, accum = LowRankCorrection.zero(), state.accum
    p, s = _next_symbols(state, a, k, trunc)
    return TaylorState(k, p, s, term, accum)


def taylor_step_general(state: TaylorState, A: QTMatrix, hankel_factors: LowRankCorrection,
                        eps: float = DEFAULT_EPS, trunc: float | None = None) -> TaylorState:
    """One step of the Taylor recurrence for ``exp(T(a) + W Y^T)``.

    The new term is assembled from the blocks
    ``[T(a)U_{k-1} + W(Y^T U_{k-1}) | U | W]`` and
    ``[V_{k-1}/k | -H((p_{k-1})_+) V / k | T(p_{k-1})^T Y / k]``.
    """
    E = A.correction
    if E.is_zero:
        return taylor_step(state, A.symbol, hankel_factors, eps, trunc)
    a = A.symbol
    k = state.i + 1
    W, Y = E.U, E.V
    _, _, p_plus = sym_split(state.p)
    ublocks, vblocks = [], []
    if not state.term.is_zero:
        Uk = state.term.U
        ublocks.append(padded_sum(toeplitz_apply(a, Uk), W @ padded_inner(Y, Uk)))
        vblocks.append(state.term.V / k)
    if not hankel_factors.is_zero and p_plus.hi > 0:
        ublocks.append(hankel_factors.U)
        vblocks.append(-hankel_apply(p_plus, hankel_factors.V) / k)
    ublocks.append(W)
    vblocks.append(toeplitz_apply(sym_reverse(state.p), Y) / k)
    term, accum = _accumulate(state, hcat(*ublocks), hcat(*vblocks), eps)
    p, s = _next_symbols(state, a, k, trunc)
    return TaylorState(k, p, s, term, accum)


def remainder_bound(k: int, norm_a: float) -> float:
    """Upper bound ``sum_{i>k} norm_a^i / i!`` on the Taylor remainder."""
    if norm_a < 0:
        raise ValueError("norm_a must be nonnegative")
    if norm_a == 0:
        return 0.0
    if norm_a >= 1:
        partial = math.fsum(norm_a ** i / math.factorial(i) for i in range(k + 1))
        tail = math.exp(norm_a) - partial
        if tail > 1e-8 * math.exp(norm_a):
            return tail
    # direct summation; terms eventually decrease geometrically
    term = math.exp((k + 1) * math.log(norm_a) - math.lgamma(k + 2))
    total = 0.0
    i = k + 1
    while True:
        total += term
        i += 1
        term *= norm_a / i
        if term <= 1e-17 * total and norm_a < i:
            return total


def scaling_exponent(xi: float) -> int:
    """Least ``q >= 0`` with ``xi / 2**q < 1``."""
    q = 0
    while xi / 2.0 ** q >= 1:
        q += 1
    return q


@dataclass
class ExpmInfo:
    """Diagnostics of a :func:`qt_expm` run."""

    q: int = 0
    terms: int = 0
    xi: float = 0.0
    symbol_discrepancy: float = 0.0
    trace: list = field(default_factory=list)


def _trace_row(phase, k, E, eps):
    return {"phase": phase, "k": k, "rows": E.rows, "cols": E.cols,
            "rank": correction_numerical_rank(E, eps)}


def _taylor_terms(xi_scaled: float, target: float, max_terms: int) -> int:
    for k in range(1, max_terms + 1):
        if remainder_bound(k, xi_scaled) <= target:
            return k
    raise ExpmConvergenceError(
        f"remainder bound not below {target:g} within {max_terms} terms")


def _taylor_stage(A: QTMatrix, n_terms: int, eps: float, trunc: float,
                  trace: list | None = None) -> TaylorState:
    a_minus, _, _ = sym_split(A.symbol)
    H = hankel_factorize(a_minus, eps)
    state = TaylorState.initial()
    for _ in range(n_terms):
        state = taylor_step_general(state, A, H, eps, trunc)
        if trace is not None:
            trace.append(_trace_row("taylor", state.i, state.accum, eps))
    return state


def qt_expm(A: QTMatrix, tol: float = 1e-13, eps: float = DEFAULT_EPS,
            scaling: int | None = None, max_terms: int = 200,
            full_output: bool = False):
    """Exponential of a quasi-Toeplitz matrix as ``T(exp(a)) + F``.

    Parameters
    ----------
    A : QTMatrix
    tol : float
        Target accuracy relative to the size of ``exp(A)``.  The Taylor loop
        stops once the remainder bound drops below ``tol / 2**(q+1)``.
    eps : float
        Relative threshold used by every compression.
    scaling : int, optional
        Force the scaling exponent ``q``; by default the least ``q`` with
        ``(||a||_W + ||E||_F) / 2**q < 1``.
    max_terms : int
        Upper limit on Taylor terms.
    full_output : bool
        Also return an :class:`ExpmInfo` with the rank trace.

    Returns
    -------
    QTMatrix or (QTMatrix, ExpmInfo)

    Notes
    -----
    The correction is compressed once more at the end, dropping trailing
    factor rows whose inf-norm is below ``tol`` times the largest one.
    The Toeplitz part of the result comes from :func:`sym_exp` applied to
    the unscaled symbol; the symbol carried through the Taylor and squaring
    stages drives the correction only, and its distance from the
    evaluation-interpolation symbol is reported as
    ``ExpmInfo.symbol_discrepancy``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    info = ExpmInfo()
    a, E = A.symbol, A.correction
    xi = wiener_norm(a) + correction_fnorm(E)
    info.xi = xi
    if xi == 0:
        result = QTMatrix.identity()
        return (result, info) if full_output else result
    q = scaling_exponent(xi) if scaling is None else int(scaling)
    info.q = q
    c = 2.0 ** -q
    scaled = QTMatrix(sym_scale(a, c), E.scaled(c))
    n_terms = _taylor_terms(xi * c, tol / 2 ** (q + 1), max_terms)
    info.terms = n_terms
    trace = info.trace if full_output else None
    state = _taylor_stage(scaled, n_terms, eps, tol / (4 * n_terms), trace)
    X = QTMatrix(state.s, state.accum)
    for j in range(1, q + 1):
        X = qt_square(X, eps, trunc=tol / (4 * (q + 1)))
        if trace is not None:
            trace.append(_trace_row("squaring", j, X.correction, eps))
    b = sym_exp(a, tol)
    nb = wiener_norm(b)
    info.symbol_discrepancy = wiener_norm(b - X.symbol) / nb if nb else 0.0
    logger.debug("qt_expm q=%d terms=%d symbol discrepancy %.3g",
                 q, n_terms, info.symbol_discrepancy)
    # final compression drops trailing rows below tol relative to the factors
    F = X.correction
    result = QTMatrix(b, LowRankCorrection(*compress(F.U, F.V, eps, trim=tol)))
    return (result, info) if full_output else result


def qt_pow(A: QTMatrix, k: int, eps: float = DEFAULT_EPS,
           history: list | None = None) -> QTMatrix:
    """``A^k = T(a^k) + D_k`` via the correction recurrence.

    ``D_i = A D_{i-1} - H(a_-) H((a^{i-1})_+) + E T(a^{i-1})`` with
    ``D_0 = 0``; for ``E = 0`` this is ``E_i = T(a) E_{i-1} - H(a_-)H((a^{i-1})_+)``.
    Each ``D_i`` is compressed and appended to ``history`` when given.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    a, E = A.symbol, A.correction
    a_minus, _, _ = sym_split(a)
    H = hankel_factorize(a_minus, eps)
    power = LaurentSeries.constant(1.0)
    D = LowRankCorrection.zero()
    for _ in range(k):
        _, _, pw_plus = sym_split(power)
        ublocks, vblocks = [], []
        if not D.is_zero:
            left = toeplitz_apply(a, D.U)
            if not E.is_zero:
                left = padded_sum(left, E.U @ padded_inner(E.V, D.U))
            ublocks.append(left)
            vblocks.append(D.V)
        if not H.is_zero and pw_plus.hi > 0:
            ublocks.append(-H.U)
            vblocks.append(hankel_apply(pw_plus, H.V))
        if not E.is_zero:
            ublocks.append(E.U)
            vblocks.append(toeplitz_apply(sym_reverse(power), E.V))
        if ublocks:
            D = LowRankCorrection(*compress(hcat(*ublocks), hcat(*vblocks), eps))
        power = sym_mul(a, power)
        power = sym_truncate(power, eps * wiener_norm(power)) if not power.is_zero else power
        if history is not None:
            history.append(D)
    return QTMatrix(power, D)


@dataclass(frozen=True)
class BoundReport:
    """Theoretical bounds evaluated at given data.

    ``bound_Ei_p`` bounds ``||E_i||_p`` for every induced ``l^p`` norm,
    ``bound_Ei_F`` and ``bound_F_F`` bound the entrywise sums of ``E_i`` and of
    ``F = exp(T(a)) - T(exp(a))``, ``bound_Di_F`` and ``bound_F_general``
    the same quantities when a correction ``E`` is present.
    """

    alpha: float
    alpha_prime: float
    beta: float
    xi: float
    gamma: tuple
    phi: float
    psi: float
    bound_Ei_p: float
    bound_Ei_F: float
    bound_F_p: float
    bound_F_F: float
    bound_Di_F: float
    bound_Di_F_closed: float
    bound_F_general: float


def bounds_report(a: LaurentSeries, E: LowRankCorrection | None, i: int) -> BoundReport:
    """Evaluate the power and exponential bounds at step ``i >= 1``."""
    if i < 1:
        raise ValueError("i must be >= 1")
    alpha = wiener_norm(a)
    alpha_prime = derivative_wiener_norm(a)
    beta = correction_fnorm(E) if E is not None else 0.0
    xi = alpha + beta
    psi = alpha_prime ** 2
    phi = psi + beta ** 2

    def gamma_j(j):
        # (j-1) a^{j-2} a'^2 + a^{j-1} b, with 0 * a^{-1} read as 0
        first = (j - 1) * alpha ** (j - 2) * psi if j >= 2 else 0.0
        return first + alpha ** (j - 1) * beta

    gamma = tuple(gamma_j(j) for j in range(1, i + 1))
    bound_Ei_F = i * (i - 1) / 2 * psi * alpha ** (i - 2) if i >= 2 else 0.0
    if beta == 0:
        bound_Di_F = bound_Di_F_closed = bound_Ei_F
    else:
        bound_Di_F = math.fsum(xi ** j * gamma[i - j - 1] for j in range(i))
        bound_Di_F_closed = (phi * (xi ** i - alpha ** i) / beta
                             - psi * i * alpha ** (i - 1)) / beta
    return BoundReport(
        alpha=alpha,
        alpha_prime=alpha_prime,
        beta=beta,
        xi=xi,
        gamma=gamma,
        phi=phi,
        psi=psi,
        bound_Ei_p=(i - 1) * alpha ** i,
        bound_Ei_F=bound_Ei_F,
        bound_F_p=2 * math.exp(alpha),
        bound_F_F=0.5 * psi * math.exp(alpha),
        bound_Di_F=bound_Di_F,
        bound_Di_F_closed=bound_Di_F_closed,
        bound_F_general=(0.5 * psi + beta) * math.exp(xi),
    )
