"""Calibrate the rank ceiling of the rank-growth experiment.

The experiment takes a symbol with window [-20, 20] and coefficients drawn
uniformly from [0, 1], then records rows, columns and numerical rank of the
correction along the powers T(a)^k, the partial sums S_k and the squaring
phase of the exponential.

This script reruns it, checks the small-k power corrections against dense
products, and writes the observed maxima plus a ceiling (observed maximum
with 25% headroom) to tests/data/rank_growth_calibration.json.

    python3 demos/calibrate_rank_growth.py
"""

import json
import math
import pathlib

import numpy as np

from qtexp import LaurentSeries, QTMatrix, qt_pow
from qtexp.cli import rank_growth

SEED = 2016
KMAX = 30
HEADROOM = 1.25
DENSE_K = 6
OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "rank_growth_calibration.json"


def rank_growth_symbol(seed=SEED):
    rng = np.random.default_rng(seed)
    return LaurentSeries(rng.uniform(0, 1, 41), -20)


def dense_rank(block, rel):
    s = np.linalg.svd(block, compute_uv=False)
    return int(np.count_nonzero(s >= rel * s[0])) if s.size and s[0] else 0


def dense_check(a, kmax=DENSE_K, m=150, N=300, rel=1e-10):
    """Compare E_k = T(a)^k - T(a^k) with dense products for k <= kmax."""
    history = []
    qt_pow(QTMatrix(a), kmax, history=history)
    T = QTMatrix(a).dense(N)
    P = np.eye(N)
    out = []
    for k in range(1, kmax + 1):
        P = P @ T
        Ek_dense = P[:m, :m] - QTMatrix(_power(a, k)).dense(m)
        Ek = history[k - 1].dense(m, m)
        scale = max(np.abs(P[:m, :m]).max(), 1.0)
        out.append({"k": k,
                    "max_abs_diff_rel": float(np.abs(Ek - Ek_dense).max() / scale),
                    "rank_structured": dense_rank(Ek, rel),
                    "rank_dense": dense_rank(Ek_dense, rel)})
    return out


def _power(a, k):
    p = LaurentSeries.constant(1.0)
    for _ in range(k):
        p = p * a
    return p


def main():
    a = rank_growth_symbol()
    rows = rank_growth(QTMatrix(a), KMAX)
    sections = {}
    for r in rows:
        sections.setdefault(r["section"], []).append(r)
    record = {
        "symbol": {"window": [-20, 20], "distribution": "uniform[0,1]", "seed": SEED,
                   "generator": "numpy.random.default_rng(seed).uniform(0, 1, 41)"},
        "kmax": KMAX,
        "headroom": HEADROOM,
        "observed_max_rank": {s: max(r["rank"] for r in v) for s, v in sections.items()},
        "observed_final": {s: v[-1] for s, v in sections.items()},
        "dense_check": dense_check(a),
    }
    record["ceiling"] = {s: math.ceil(HEADROOM * m) for s, m in record["observed_max_rank"].items()}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(record, indent=2) + "\n")
    print(json.dumps({k: record[k] for k in ("observed_max_rank", "ceiling")}, indent=2))
    for d in record["dense_check"]:
        print(d)


if __name__ == "__main__":
    main()
