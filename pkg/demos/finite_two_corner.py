"""
Finite Toeplitz matrices
========================

For an n x n section T_n(a) the exponential picks up a correction in each
corner.  The south-east one is the north-west one of the reversed symbol
a(1/z), read backwards.
"""

import numpy as np

from qtexp import FiniteQTMatrix, LaurentSeries, dense_expm_oracle, finite_expm, finite_square

a = LaurentSeries([1.0, 0.0, 1.0], lo=-1)

# the smallest case by hand: T_3(a)^2 = T_3(a^2) - e1 e1^T - e3 e3^T
S = finite_square(FiniteQTMatrix(3, a))
print(S.dense())
print("NW", S.nw.dense(3, 3)[0, 0], "SE", S.se.dense(3, 3)[0, 0])

# a nonsymmetric symbol makes the two corners differ
b = LaurentSeries([0.3, -0.5, 1.0, 0.8], lo=-2)
A = FiniteQTMatrix(200, b)
X = finite_expm(A, tol=1e-13)
D = dense_expm_oracle(A.dense())
err = np.abs(X.dense() - D).sum(axis=1).max() / np.abs(D).sum(axis=1).max()
print(f"n=200 relative error {err:.1e}")
print(f"NW corner {X.nw.rows}x{X.nw.cols}, SE corner {X.se.rows}x{X.se.cols}")
