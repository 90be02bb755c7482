"""Command-line interface: ``fsht plan | convert | bench``.

Exit codes: 0 success, 2 invalid flags or unreadable input, 3 bandlimit
beyond the exact-integer range of the rotation formulas, 4 coefficient
kind or bandlimit mismatch.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from dataclasses import astuple, dataclass, fields

import numpy as np

from .coeffs import CoeffMatrix, Kind, load_coeffs, save_coeffs
from .transform import (
    DEFAULT_STRIDE,
    DEFAULT_TOL,
    Mode,
    fourier2sph,
    load_plan,
    plan,
    plan_to_bytes,
    save_plan,
    sph2fourier,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_OVERFLOW = 3
EXIT_MISMATCH = 4

CSV_HEADER = ["n", "mode", "build_s", "fwd_s", "inv_s", "max_col_err",
              "plan_bytes", "rank_avg", "rank_std"]
TIMING_COLUMNS = ("build_s", "fwd_s", "inv_s")


@dataclass
class BenchRecord:
    n: int
    mode: str
    build_seconds: float
    forward_seconds: float
    inverse_seconds: float
    max_col_err: float
    plan_bytes: int
    rank_avg: float
    rank_std: float

    def row(self) -> list[str]:
        return [str(self.n), self.mode, f"{self.build_seconds:.6f}",
                f"{self.forward_seconds:.6f}", f"{self.inverse_seconds:.6f}",
                f"{self.max_col_err:.6e}", str(self.plan_bytes),
                f"{self.rank_avg:.4f}", f"{self.rank_std:.4f}"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _pos_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _stride(text: str) -> int:
    value = int(text)
    if value < 2 or value % 2:
        raise argparse.ArgumentTypeError(f"must be a positive even integer, got {value}")
    return value


def _tol(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {value}")
    return value


def _n_list(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values or min(values) < 0:
        raise argparse.ArgumentTypeError("need a comma-separated list of non-negative integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fsht", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=_pos_int, default=None,
                        help="worker threads (default: $FSHT_THREADS or all cores)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("plan", help="build and optionally save a transform plan")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--tol", type=_tol, default=DEFAULT_TOL)
    p.add_argument("--mode", choices=["dense", "thin"], default="dense")
    p.add_argument("--stride", type=_stride, default=DEFAULT_STRIDE)
    p.add_argument("--out", default=None)

    c = sub.add_parser("convert", help="run coefficients through a saved plan")
    c.add_argument("--plan", required=True)
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--direction", choices=["sph2fourier", "fourier2sph"], required=True)
    c.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="round-trip timing and error table as CSV")
    b.add_argument("--n-list", type=_n_list, required=True)
    b.add_argument("--mode", choices=["dense", "thin"], default="dense")
    b.add_argument("--trials", type=_pos_int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--tol", type=_tol, default=DEFAULT_TOL)
    b.add_argument("--stride", type=_stride, default=DEFAULT_STRIDE)
    return parser


def _set_threads(requested: int | None) -> None:
    if requested is None:
        env = os.environ.get("FSHT_THREADS")
        if not env:
            return
        try:
            requested = int(env)
        except ValueError:
            raise SystemExit(EXIT_USAGE) from None
        if requested < 1:
            raise SystemExit(EXIT_USAGE)
    import numba
    numba.set_num_threads(min(requested, numba.config.NUMBA_NUM_THREADS))


def cmd_plan(args) -> int:
    t0 = time.perf_counter()
    p = plan(args.n, args.tol, Mode.parse(args.mode), args.stride)
    elapsed = time.perf_counter() - t0
    if args.out:
        size = save_plan(args.out, p)
    else:
        size = len(plan_to_bytes(p))
    print(f"n={p.n} mode={args.mode} stride={p.stride} build_s={elapsed:.3f} bytes={size}")
    return EXIT_OK


def cmd_convert(args) -> int:
    try:
        p = load_plan(args.plan)
        F = load_coeffs(args.inp)
    except (OSError, ValueError) as exc:
        print(f"fsht: {exc}", file=sys.stderr)
        return EXIT_USAGE
    want = Kind.SPHERICAL_HARMONIC if args.direction == "sph2fourier" else Kind.FOURIER
    if F.kind != want or F.n != p.n:
        print(f"fsht: input is {F.kind.name} with n={F.n}; "
              f"{args.direction} with this plan needs {want.name} with n={p.n}",
              file=sys.stderr)
        return EXIT_MISMATCH
    fn = sph2fourier if args.direction == "sph2fourier" else fourier2sph
    save_coeffs(args.out, fn(p, F))
    return EXIT_OK


def bench_records(n_list, mode, trials, seed, tol=DEFAULT_TOL, stride=DEFAULT_STRIDE):
    rng = np.random.Generator(np.random.PCG64(seed))
    mode = Mode.parse(mode)
    label = "dense" if mode == Mode.DENSE_GIVENS else "thin"
    for n in n_list:
        t0 = time.perf_counter()
        p = plan(n, tol, mode, stride)
        build = time.perf_counter() - t0
        fwd = inv = err = 0.0
        for _ in range(trials):
            F = CoeffMatrix.random(n, rng)
            t0 = time.perf_counter()
            G = sph2fourier(p, F)
            t1 = time.perf_counter()
            H = fourier2sph(p, G)
            t2 = time.perf_counter()
            fwd += t1 - t0
            inv += t2 - t1
            err += float(np.linalg.norm(H.data - F.data, axis=0).max())
        stats = p.rank_stats()
        yield BenchRecord(n, label, build, fwd / trials, inv / trials, err / trials,
                          p.nbytes, stats.avg, stats.std)


def cmd_bench(args) -> int:
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(CSV_HEADER)
    for rec in bench_records(args.n_list, args.mode, args.trials, args.seed,
                             args.tol, args.stride):
        out.writerow(rec.row())
        sys.stdout.flush()
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _set_threads(args.threads)
    handler = {"plan": cmd_plan, "convert": cmd_convert, "bench": cmd_bench}[args.command]
    try:
        return handler(args)
    except OverflowError as exc:
        print(f"fsht: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW


if __name__ == "__main__":
    sys.exit(main())
