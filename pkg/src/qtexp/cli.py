"""Command-line interface ``qtexp``.

Subcommands::

    qtexp exp          --symbol PATH --tol FLOAT --out PATH
    qtexp verify       --symbol PATH --tol FLOAT --block INT --trunc INT
    qtexp bench-banded --n-minus INT... --n-plus INT --tol FLOAT --out PATH
    qtexp rank-growth  --symbol PATH --kmax INT --out PATH
    qtexp tridiag      --alpha FLOAT... --tol FLOAT --out PATH

Symbols and results are JSON documents::

    {"lo": -1, "hi": 1, "coeffs": [[1.0, 0.0], [2.0, 0.0], [1.0, 0.0]],
     "correction": {"u": {"shape": [m, r], "data": [[re, im], ...]},
                    "v": {"shape": [n, r], "data": [[re, im], ...]}}}

``data`` is row-major; ``correction`` is optional.  Tables are CSV with a
fixed header (see ``EXPERIMENT_FIELDS`` and ``RANK_GROWTH_FIELDS``).

Exit codes: 0 success, 2 usage or parse error, 3 numerical threshold
violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from .expm import ExpmConvergenceError, TaylorState, qt_expm, qt_pow, taylor_step_general
from .finite import dense_expm_oracle, dense_truncation
from .lowrank import (
    DEFAULT_EPS,
    LowRankCorrection,
    correction_numerical_rank,
    hankel_factorize,
)
from .qt import QTMatrix, qt_dense_block
from .symbol import LaurentSeries, SymbolConvergenceError, numerical_bandwidth, sym_split

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_THRESHOLD = 3

EXPERIMENT_FIELDS = ["case_id", "n_minus", "elapsed", "rel_error",
                     "band", "rows", "cols", "rank"]
RANK_GROWTH_FIELDS = ["section", "k", "rows", "cols", "rank"]

# largest dense truncation the oracle is allowed to build
MAX_DENSE = 3000


class SymbolFileError(ValueError):
    """Malformed symbol file."""


@dataclass
class ExperimentRow:
    case_id: str
    n_minus: int
    elapsed: float
    rel_error: float | None
    band: int
    rows: int
    cols: int
    rank: int


# ---------------------------------------------------------------- file I/O

def _parse_scalar(x) -> complex:
    if isinstance(x, bool):
        raise SymbolFileError("boolean where a number was expected")
    if isinstance(x, (int, float)):
        z = complex(x)
    elif isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        z = complex(x[0], x[1])
    else:
        raise SymbolFileError(f"cannot read {x!r} as a scalar")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise SymbolFileError("non-finite value")
    return z


def _parse_block(doc, name: str) -> np.ndarray:
    if not isinstance(doc, dict) or "shape" not in doc or "data" not in doc:
        raise SymbolFileError(f"correction.{name} needs 'shape' and 'data'")
    shape = doc["shape"]
    if (not isinstance(shape, list) or len(shape) != 2
            or not all(isinstance(s, int) and s >= 0 for s in shape)):
        raise SymbolFileError(f"correction.{name}.shape must be two nonnegative integers")
    data = doc["data"]
    if not isinstance(data, list) or len(data) != shape[0] * shape[1]:
        raise SymbolFileError(f"correction.{name}.data length does not match shape")
    values = np.array([_parse_scalar(x) for x in data], dtype=complex)
    return values.reshape(shape)


def symbol_from_json(doc) -> QTMatrix:
    """Build a :class:`QTMatrix` from a parsed symbol document."""
    if not isinstance(doc, dict):
        raise SymbolFileError("top level must be an object")
    try:
        lo, hi, coeffs = doc["lo"], doc["hi"], doc["coeffs"]
    except KeyError as exc:
        raise SymbolFileError(f"missing field {exc.args[0]!r}") from None
    if not isinstance(lo, int) or not isinstance(hi, int) or lo > hi:
        raise SymbolFileError("lo and hi must be integers with lo <= hi")
    if not isinstance(coeffs, list) or len(coeffs) != hi - lo + 1:
        raise SymbolFileError("coeffs must have hi - lo + 1 entries")
    values = np.array([_parse_scalar(x) for x in coeffs], dtype=complex)
    if lo > 0:
        values = np.concatenate([np.zeros(lo, complex), values])
        lo = 0
    if hi < 0:
        values = np.concatenate([values, np.zeros(-hi, complex)])
    symbol = LaurentSeries(values, lo)
    E = LowRankCorrection.zero()
    corr = doc.get("correction")
    if corr is not None:
        if not isinstance(corr, dict):
            raise SymbolFileError("correction must be an object")
        U, V = _parse_block(corr.get("u"), "u"), _parse_block(corr.get("v"), "v")
        if U.shape[1] != V.shape[1]:
            raise SymbolFileError("correction factors need equal column counts")
        E = LowRankCorrection(U, V)
    return QTMatrix(symbol, E)


def _pairs(values) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, complex).ravel()]


def symbol_to_json(A: QTMatrix) -> dict:
    """Inverse of :func:`symbol_from_json`."""
    a = A.symbol
    doc = {"lo": a.lo, "hi": a.hi, "coeffs": _pairs(a.coeffs)}
    E = A.correction
    if not E.is_zero:
        doc["correction"] = {
            "u": {"shape": list(E.U.shape), "data": _pairs(E.U)},
            "v": {"shape": list(E.V.shape), "data": _pairs(E.V)},
        }
    return doc


def load_symbol(path: str) -> QTMatrix:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh, parse_constant=_reject_constant)
    except OSError as exc:
        raise SymbolFileError(str(exc)) from None
    except json.JSONDecodeError as exc:
        raise SymbolFileError(f"invalid JSON: {exc}") from None
    return symbol_from_json(doc)


def _reject_constant(name):
    raise SymbolFileError(f"non-finite value {name}")


def save_symbol(A: QTMatrix, path: str) -> None:
    # json writes floats with the shortest repr that round-trips exactly
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(symbol_to_json(A), fh, allow_nan=False)
        fh.write("\n")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(rows: list[dict], fields: list[str], path: str | None) -> None:
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row[f]) for f in fields])
    finally:
        if fh is not sys.stdout:
            fh.close()


def read_experiment_csv(path: str) -> list[ExperimentRow]:
    """Parse a CSV written by ``bench-banded`` or ``tridiag``."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != EXPERIMENT_FIELDS:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for r in reader:
            out.append(ExperimentRow(
                case_id=r["case_id"], n_minus=int(r["n_minus"]),
                elapsed=float(r["elapsed"]),
                rel_error=float(r["rel_error"]) if r["rel_error"] else None,
                band=int(r["band"]), rows=int(r["rows"]), cols=int(r["cols"]),
                rank=int(r["rank"])))
    return out


# ------------------------------------------------------------- experiments

def banded_symbol(n_minus: int, n_plus: int) -> LaurentSeries:
    """``sum_{i=1}^{n_plus} z^i + sum_{i=0}^{n_minus} z^{-i}``."""
    return LaurentSeries(np.ones(n_minus + n_plus + 1), -n_minus)


def tridiag_symbol(alpha: float) -> LaurentSeries:
    return LaurentSeries([1.0, alpha, 1.0], -1)


def relative_block_error(X: QTMatrix, A: QTMatrix, m: int, N: int) -> float:
    """``||X_m - exp(A_N)_m||_inf / ||exp(A_N)_m||_inf`` with the dense oracle."""
    D = dense_expm_oracle(dense_truncation(A.symbol, A.correction, N))[:m, :m]
    Q = qt_dense_block(X, m, m)
    ref = np.abs(D).sum(axis=1).max()
    return float(np.abs(Q - D).sum(axis=1).max() / ref)


def run_case(case_id: str, A: QTMatrix, tol: float, eps: float,
             block: int | None = None, trunc: int | None = None,
             max_dense: int = MAX_DENSE) -> ExperimentRow:
    """Exponentiate ``A`` and describe the result as an :class:`ExperimentRow`.

    The error block defaults to ``m`` = numerical bandwidth of the result
    symbol and the truncation to ``N = 2m``; it is left blank when ``N``
    exceeds ``max_dense``.
    """
    t0 = time.perf_counter()
    X = qt_expm(A, tol, eps)
    elapsed = time.perf_counter() - t0
    band = numerical_bandwidth(X.symbol, eps)
    m = block if block is not None else max(band, 1)
    N = trunc if trunc is not None else 2 * m
    err = relative_block_error(X, A, m, N) if N <= max_dense else None
    E = X.correction
    a_minus, _, _ = sym_split(A.symbol)
    return ExperimentRow(case_id, a_minus.hi, elapsed, err, band,
                         E.rows, E.cols, correction_numerical_rank(E, eps))


def rank_growth(A: QTMatrix, kmax: int, tol: float = 1e-13,
                eps: float = DEFAULT_EPS) -> list[dict]:
    """Rows, columns and numerical rank of the corrections along three phases.

    ``power``: ``T(a)^k - T(a^k)`` for ``k = 1..kmax``; ``partial-sum``: the
    correction of ``S_k = sum_{i<=k} A^i / i!`` (unscaled); ``squaring``: each
    squaring step of :func:`qt_expm`.
    """
    rows = []
    history = []
    qt_pow(A, kmax, eps, history=history)
    for k, D in enumerate(history, 1):
        rows.append({"section": "power", "k": k, "rows": D.rows, "cols": D.cols,
                     "rank": correction_numerical_rank(D, eps)})
    a_minus, _, _ = sym_split(A.symbol)
    H = hankel_factorize(a_minus, eps)
    state = TaylorState.initial()
    for _ in range(kmax):
        state = taylor_step_general(state, A, H, eps)
        F = state.accum
        rows.append({"section": "partial-sum", "k": state.i, "rows": F.rows,
                     "cols": F.cols, "rank": correction_numerical_rank(F, eps)})
    _, info = qt_expm(A, tol, eps, full_output=True)
    for r in info.trace:
        if r["phase"] == "squaring":
            rows.append({"section": "squaring", "k": r["k"], "rows": r["rows"],
                         "cols": r["cols"], "rank": r["rank"]})
    return rows


# ---------------------------------------------------------------- commands

def cmd_exp(args) -> int:
    A = load_symbol(args.symbol)
    try:
        X = qt_expm(A, args.tol, args.eps_rank)
    except (SymbolConvergenceError, ExpmConvergenceError) as exc:
        print(f"qtexp: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    if args.out in (None, "-"):
        json.dump(symbol_to_json(X), sys.stdout, allow_nan=False)
        sys.stdout.write("\n")
    else:
        save_symbol(X, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    m = args.block
    N = args.trunc if args.trunc is not None else 3 * m
    if m < 1 or N < 2 * m:
        print(f"qtexp: need block >= 1 and trunc >= 2*block (got m={m}, N={N})",
              file=sys.stderr)
        return EXIT_USAGE
    A = load_symbol(args.symbol)
    try:
        X = qt_expm(A, args.tol, args.eps_rank)
    except (SymbolConvergenceError, ExpmConvergenceError) as exc:
        print(f"qtexp: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    err = relative_block_error(X, A, m, N)
    ok = verify_passes(err, args.tol)
    print(f"rel_error {err:.3e} threshold {100 * args.tol:.3e} {'ok' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_THRESHOLD


def verify_passes(err: float, tol: float) -> bool:
    return err <= 100 * tol


def _emit_rows(rows: list[ExperimentRow], tol: float, out) -> int:
    write_csv([asdict(r) for r in rows], EXPERIMENT_FIELDS, out)
    bad = [r for r in rows if r.rel_error is not None and not verify_passes(r.rel_error, tol)]
    for r in bad:
        print(f"qtexp: {r.case_id} error {r.rel_error:.3e} above {100 * tol:.3e}",
              file=sys.stderr)
    return EXIT_THRESHOLD if bad else EXIT_OK


def cmd_bench_banded(args) -> int:
    if args.n_plus < 1 or any(n < 0 for n in args.n_minus):
        print("qtexp: need n_plus >= 1 and n_minus >= 0", file=sys.stderr)
        return EXIT_USAGE
    rows = []
    for nm in args.n_minus:
        A = QTMatrix(banded_symbol(nm, args.n_plus))
        rows.append(run_case(f"banded-{nm}-{args.n_plus}", A, args.tol, args.eps_rank,
                             max_dense=args.max_dense))
    return _emit_rows(rows, args.tol, args.out)


def cmd_tridiag(args) -> int:
    rows = []
    for alpha in args.alpha:
        A = QTMatrix(tridiag_symbol(alpha))
        rows.append(run_case(f"trid-{alpha:g}", A, args.tol, args.eps_rank,
                             block=args.block, trunc=args.trunc or 3 * args.block))
    return _emit_rows(rows, args.tol, args.out)


def cmd_rank_growth(args) -> int:
    if args.kmax < 1:
        print("qtexp: kmax must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    A = load_symbol(args.symbol)
    write_csv(rank_growth(A, args.kmax, args.tol, args.eps_rank), RANK_GROWTH_FIELDS, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtexp",
                                     description="Exponentials of quasi-Toeplitz matrices.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol=1e-13):
        p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--eps-rank", type=float, default=DEFAULT_EPS,
                       help="compression and rank threshold")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("exp", help="exponential of a symbol file")
    p.add_argument("--symbol", required=True)
    common(p)
    p.set_defaults(func=cmd_exp)

    p = sub.add_parser("verify", help="compare against the dense oracle")
    p.add_argument("--symbol", required=True)
    p.add_argument("--block", type=int, default=100)
    p.add_argument("--trunc", type=int, default=None, help="dense size N (default 3*block)")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench-banded", help="banded all-ones symbols")
    p.add_argument("--n-minus", type=int, nargs="+", default=[10, 20, 40])
    p.add_argument("--n-plus", type=int, default=5)
    p.add_argument("--max-dense", type=int, default=MAX_DENSE,
                   help="skip the oracle above this truncation size")
    common(p)
    p.set_defaults(func=cmd_bench_banded)

    p = sub.add_parser("rank-growth", help="correction size and rank along the algorithm")
    p.add_argument("--symbol", required=True)
    p.add_argument("--kmax", type=int, default=30)
    common(p)
    p.set_defaults(func=cmd_rank_growth)

    p = sub.add_parser("tridiag", help="trid(1, alpha, 1) suite")
    p.add_argument("--alpha", type=float, nargs="+", default=[-4, -2, 0, 2, 4])
    p.add_argument("--block", type=int, default=100)
    p.add_argument("--trunc", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_tridiag)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if getattr(args, "tol", 1.0) <= 0 or getattr(args, "eps_rank", 1.0) <= 0:
        print("qtexp: tol and eps-rank must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except SymbolFileError as exc:
        print(f"qtexp: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
