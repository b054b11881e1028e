"""
Banded all-ones symbols
=======================

a(z) = z + ... + z^5 + 1 + 1/z + ... + 1/z^n_minus.  The bandwidth of
exp(a) grows quickly with n_minus while the rank of the correction stays
small.  The dense check uses a section of size 2m, m the bandwidth, and
is skipped when that gets too large.
"""

from qtexp import QTMatrix
from qtexp.cli import banded_symbol, run_case
from qtexp.lowrank import DEFAULT_EPS

print(f"{'n_-':>4} {'time':>7} {'err':>9} {'band':>6} {'rows':>6} {'cols':>5} {'rank':>5}")
for n_minus in (10, 20, 40, 60, 100):
    row = run_case(f"banded-{n_minus}", QTMatrix(banded_symbol(n_minus, 5)), 1e-13,
                   DEFAULT_EPS, max_dense=2000)
    err = "-" if row.rel_error is None else f"{row.rel_error:.1e}"
    print(f"{n_minus:>4} {row.elapsed:7.2f} {err:>9} {row.band:>6} {row.rows:>6} "
          f"{row.cols:>5} {row.rank:>5}")
