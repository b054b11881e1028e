"""
Exponential of a semi-infinite Toeplitz matrix
==============================================

A tridiagonal Toeplitz matrix T = trid(1, alpha, 1) is represented by its
symbol a(z) = 1/z + alpha + z.  Its exponential is again Toeplitz plus a
small correction in the top-left corner, exp(T(a)) = T(exp(a)) + F.
"""

import numpy as np

from qtexp import (
    LaurentSeries,
    QTMatrix,
    correction_numerical_rank,
    dense_expm_oracle,
    numerical_bandwidth,
    qt_expm,
)

alpha = 2.0
a = LaurentSeries([1.0, alpha, 1.0], lo=-1)
A = QTMatrix(a)

X, info = qt_expm(A, tol=1e-13, full_output=True)
F = X.correction
print(f"scaling q = {info.q}, Taylor terms = {info.terms}")
print(f"bandwidth of T(exp(a)): {numerical_bandwidth(X.symbol)}")
print(f"correction F: {F.rows} x {F.cols}, numerical rank {correction_numerical_rank(F)}")

# compare the leading 100 x 100 block with a dense exponential of a 300 x 300
# section; the extra rows keep the truncation boundary out of the block
m, N = 100, 300
Q = X.dense(m)
D = dense_expm_oracle(A.dense(N))[:m, :m]
err = np.abs(Q - D).sum(axis=1).max() / np.abs(D).sum(axis=1).max()
print(f"relative inf-norm error vs dense: {err:.2e}")

# the correction is concentrated in the corner and decays fast
np.set_printoptions(precision=2, linewidth=110)
print(np.abs(F.dense(8, 8)))
