"""Command-line entry point: ``ompx {sweep,verify,gen}``.

Exit status: 0 on success, 1 on usage or configuration errors, 2 when an
equivalence check fails.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .bench import SweepConfig, emit_csv, run_sweep, summarize
from .linalg import DegenerateAtomSetError
from .recovery import OmpConfig, compare_results, omp1d, omp2d
from .sensing import column_norms
from .signalgen import derive_seed, make_instance, save_instance

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_EQUIVALENT = 2

SEED_ENV = "OMPX_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(value: str) -> int:
    s = int(value, 0)
    if not 0 <= s < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed {value} is not a 64-bit unsigned integer")
    return s


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ompx", description="1D-OMP vs 2D-OMP recovery and benchmarking")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sweep", help="time both algorithms over an (m, k) grid")
    s.add_argument("--n", type=int, default=128)
    s.add_argument("--m", type=int, action="append", dest="m_list",
                   help="sample size; repeat for several (default: 16 and 32)")
    s.add_argument("--k-min", type=int, default=8)
    s.add_argument("--k-max", type=int, default=16)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--algo", choices=["1d", "2d", "both"], default="both")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--check-equivalence", action="store_true")
    s.add_argument("--out", default="sweep", help="output prefix for the two CSV files")
    s.add_argument("--memory-cap-mb", type=float, default=1024.0)
    s.add_argument("--parallel", type=int, default=1,
                   help="worker threads; >1 is correctness-only, timings are not meaningful")

    v = sub.add_parser("verify", help="check 1D/2D equivalence on random instances")
    v.add_argument("--n", type=int, default=16)
    v.add_argument("--m", type=int, default=8)
    v.add_argument("--k", type=int, default=4)
    v.add_argument("--trials", type=int, default=50)
    v.add_argument("--seed", type=_seed, default=0)
    v.add_argument("--tol", type=float, default=1e-12)
    v.add_argument("--memory-cap-mb", type=float, default=1024.0)

    g = sub.add_parser("gen", help="write one problem instance to a directory")
    g.add_argument("--n", type=int, default=128)
    g.add_argument("--m", type=int, default=16)
    g.add_argument("--k", type=int, default=8)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("--out", required=True)
    return p


def _env_seed(args) -> None:
    raw = os.environ.get(SEED_ENV)
    if raw and hasattr(args, "seed"):
        try:
            args.seed = _seed(raw)
        except argparse.ArgumentTypeError as exc:
            raise ValueError(f"{SEED_ENV}: {exc}") from exc


def _cmd_sweep(args) -> int:
    cfg = SweepConfig(
        n=args.n, m_list=tuple(args.m_list or (16, 32)), k_min=args.k_min, k_max=args.k_max,
        trials=args.trials, seed=args.seed, algo=args.algo, tol=args.tol,
        check_equivalence=args.check_equivalence, out_path=args.out,
        memory_cap_bytes=int(args.memory_cap_mb * (1 << 20)), parallel=args.parallel,
    ).validate()
    records = run_sweep(cfg)
    summary = summarize(records)
    trials_path, summary_path = emit_csv(records, summary, cfg.out_path)
    for row in summary:
        print(f"n={row.n} m={row.m} k={row.k} trials={row.trials} speedup={row.speedup:.2f}")
    print(f"wrote {trials_path} and {summary_path}")
    if cfg.check_equivalence and any(r.equivalent is False for r in records):
        print("equivalence check FAILED", file=sys.stderr)
        return EXIT_NOT_EQUIVALENT
    return EXIT_OK


def _cmd_verify(args) -> int:
    if not 1 <= args.m <= args.n or not 1 <= args.k <= args.n * args.n or args.trials < 1:
        raise ValueError(f"invalid sizes n={args.n} m={args.m} k={args.k} trials={args.trials}")
    cfg = OmpConfig(args.k, args.tol)
    cap = int(args.memory_cap_mb * (1 << 20))
    failures = 0
    for trial in range(args.trials):
        inst = make_instance(args.n, args.m, args.k, derive_seed(args.seed, trial),
                             with_omega=True, memory_cap=cap)
        rho = column_norms(inst.omega)
        try:
            r1 = omp1d(inst.omega, rho, inst.y, cfg)
            r2 = omp2d(inst.dictionary, inst.Y, cfg)
        except DegenerateAtomSetError as exc:
            ok, why = False, str(exc)
        else:
            ok, why = compare_results(r1, r2, args.n)
        failures += not ok
        print(f"trial {trial}: {'PASS' if ok else 'FAIL'}" + (f" ({why})" if why else ""))
    verdict = "PASS" if failures == 0 else "FAIL"
    print(f"{verdict}: {args.trials - failures}/{args.trials} trials equivalent "
          f"(n={args.n}, m={args.m}, k={args.k})")
    return EXIT_OK if failures == 0 else EXIT_NOT_EQUIVALENT


def _cmd_gen(args) -> int:
    inst = make_instance(args.n, args.m, args.k, args.seed)
    out = save_instance(args.out, inst)
    print(f"wrote instance to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    handler = {"sweep": _cmd_sweep, "verify": _cmd_verify, "gen": _cmd_gen}[args.command]
    try:
        _env_seed(args)
        return handler(args)
    except (ValueError, MemoryError, OSError) as exc:
        print(f"ompx {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
