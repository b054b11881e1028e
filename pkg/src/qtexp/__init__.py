"""Exponentials of quasi-Toeplitz matrices.

A quasi-Toeplitz (QT) matrix is a semi-infinite matrix ``A = T(a) + E`` with
``T(a)`` Toeplitz (``t_ij = a_{j-i}``) and ``E`` a correction of finite
entrywise absolute sum, stored as a low-rank factor pair.  ``exp(A)`` is
again QT and is returned as ``T(exp(a)) + F``.
"""

from .expm import (
    BoundReport,
    ExpmConvergenceError,
    ExpmInfo,
    TaylorState,
    bounds_report,
    qt_expm,
    qt_pow,
    remainder_bound,
    scaling_exponent,
    taylor_step,
    taylor_step_general,
)
from .finite import (
    CornerOverlapError,
    FiniteQTMatrix,
    dense_expm_oracle,
    dense_truncation,
    finite_expm,
    finite_square,
)
from .lowrank import (
    LowRankCorrection,
    compress,
    correction_add,
    correction_entry,
    correction_fnorm,
    correction_numerical_rank,
    hankel_apply,
    hankel_factorize,
    toeplitz_apply,
)
from .qt import QTMatrix, qt_add, qt_dense_block, qt_mul, qt_scale, qt_square
from .symbol import (
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

__version__ = "0.1.0"
