"""
How the correction grows
========================

Random symbol on [-20, 20] with coefficients uniform in [0, 1].  We follow
the size and numerical rank of the correction along the powers T(a)^k, the
Taylor partial sums, and the squaring steps.  Rows grow about linearly, the
rank saturates and then drops.
"""

import numpy as np

from qtexp import LaurentSeries, QTMatrix
from qtexp.cli import rank_growth

rng = np.random.default_rng(2016)
a = LaurentSeries(rng.uniform(0, 1, 41), lo=-20)

table = rank_growth(QTMatrix(a), kmax=30)
for section in ("power", "partial-sum", "squaring"):
    print(section)
    for r in table:
        if r["section"] == section and (r["k"] % 5 == 0 or section == "squaring"):
            print(f"  k={r['k']:>3} rows={r['rows']:>4} cols={r['cols']:>4} rank={r['rank']:>4}")
