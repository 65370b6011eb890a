"""Timing harness comparing 1D-OMP and 2D-OMP on identical instances.

Timing protocol: every timed run is preceded by one untimed warm-up run on
the same instance, and the clock is ``time.perf_counter_ns`` (monotonic,
nanosecond units; actual resolution is platform dependent, well under a
microsecond on Linux). Building ``Omega`` and its column norms happens before
the 1D clock starts, since 1D-OMP receives the dictionary as input.
Trials run sequentially unless ``parallel > 1``, which is a correctness-only
mode: warm-ups are skipped and wall times are not comparable.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import DegenerateAtomSetError, frobenius_norm
from .recovery import OmpConfig, compare_results, omp1d, omp2d
from .sensing import MemoryCapError, build_omega, column_norms
from .signalgen import derive_seed, make_instance

log = logging.getLogger(__name__)

__all__ = [
    "ALGOS",
    "SweepConfig",
    "BenchRecord",
    "SummaryRow",
    "run_trial",
    "run_sweep",
    "summarize",
    "emit_csv",
    "TRIALS_HEADER",
    "SUMMARY_HEADER",
]

ALGOS = ("1d", "2d", "both")

TRIALS_HEADER = [
    "n", "m", "k", "trial", "algo", "wall_time_ns", "project_flops", "weights_flops",
    "residual_flops", "iterations", "final_residual_rel", "recovery_error_rel", "equivalent",
]
SUMMARY_HEADER = ["n", "m", "k", "trials", "mean_time_1d_ns", "mean_time_2d_ns", "speedup"]


@dataclass
class SweepConfig:
    n: int = 128
    m_list: tuple = (16, 32)
    k_min: int = 8
    k_max: int = 16
    trials: int = 100
    seed: int = 0
    algo: str = "both"
    tol: float = 1e-12
    check_equivalence: bool = False
    out_path: str | None = None
    memory_cap_bytes: int = 1 << 30
    warmup: bool = True
    parallel: int = 1

    def validate(self) -> "SweepConfig":
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.m_list:
            raise ValueError("at least one m is required")
        for m in self.m_list:
            if not 1 <= m <= self.n:
                raise ValueError(f"m={m} must satisfy 1 <= m <= n={self.n}")
        if self.k_min > self.k_max:
            raise ValueError(f"empty k range: k-min {self.k_min} > k-max {self.k_max}")
        if self.k_min < 1 or self.k_max > self.n * self.n:
            raise ValueError(f"k range [{self.k_min}, {self.k_max}] outside [1, {self.n * self.n}]")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}, got {self.algo!r}")
        if not self.tol >= 0:
            raise ValueError(f"tol must be non-negative, got {self.tol}")
        if self.parallel < 1:
            raise ValueError(f"parallel must be >= 1, got {self.parallel}")
        return self

    @property
    def k_values(self) -> range:
        return range(self.k_min, self.k_max + 1)


@dataclass
class BenchRecord:
    """One algorithm's run on one trial.

    ``status`` is ``"ok"``, ``"degenerate"`` (aborted on linearly dependent
    atoms; the partial result is reported) or ``"skipped"`` (1D only, when
    ``Omega`` would exceed the memory cap). Skipped records carry no timing
    and are not written to CSV.
    """

    n: int
    m: int
    k: int
    trial: int
    algo: str
    wall_time_ns: int = 0
    project_flops: int = 0
    weights_flops: int = 0
    residual_flops: int = 0
    iterations: int = 0
    final_residual_rel: float = math.nan
    recovery_error_rel: float = math.nan
    equivalent: bool | None = None
    status: str = "ok"
    reason: str = ""
    selected: tuple = field(default=(), repr=False)


@dataclass
class SummaryRow:
    n: int
    m: int
    k: int
    trials: int
    mean_time_1d_ns: float
    mean_time_2d_ns: float
    speedup: float


def _timed(fn, warmup: bool):
    if warmup:
        try:
            fn()
        except DegenerateAtomSetError:
            pass
    start = time.perf_counter_ns()
    try:
        res, err = fn(), None
    except DegenerateAtomSetError as exc:
        res, err = exc.partial, exc
    elapsed = time.perf_counter_ns() - start
    return res, max(elapsed, 1), err


def _record(inst, algo, trial, res, elapsed, err) -> BenchRecord:
    cfg = inst.config
    z_true = inst.z_true.dense()
    z_hat = res.coefficients.reshape(z_true.shape)
    ztrue_norm = frobenius_norm(z_true)
    err_norm = frobenius_norm(z_hat - z_true)
    recovery = err_norm / ztrue_norm if ztrue_norm > 0 else (0.0 if err_norm == 0 else math.inf)
    ynorm = frobenius_norm(inst.Y)
    last = res.residual_norms[-1] if res.residual_norms else ynorm
    sel = tuple(res.selected)
    return BenchRecord(
        n=cfg["n"], m=cfg["m"], k=cfg["k"], trial=trial, algo=algo,
        wall_time_ns=int(elapsed),
        project_flops=res.flops.project, weights_flops=res.flops.weights,
        residual_flops=res.flops.residual, iterations=res.iterations,
        final_residual_rel=last / ynorm if ynorm > 0 else 0.0,
        recovery_error_rel=recovery,
        status="degenerate" if err is not None else "ok",
        reason=str(err) if err is not None else "",
        selected=sel,
    )


def run_trial(n: int, m: int, k: int, trial_index: int, cfg: SweepConfig) -> list[BenchRecord]:
    """Generate one instance and run the requested algorithm(s) on it."""
    seed = derive_seed(cfg.seed, n, m, k, trial_index)
    inst = make_instance(n, m, k, seed)
    omp_cfg = OmpConfig(k, cfg.tol)
    records = []
    results = {}

    if cfg.algo in ("1d", "both"):
        try:
            omega = build_omega(inst.dictionary, cfg.memory_cap_bytes)
        except MemoryCapError as exc:
            log.warning("n=%d m=%d k=%d trial=%d: 1D skipped: %s", n, m, k, trial_index, exc)
            records.append(BenchRecord(n, m, k, trial_index, "1d", status="skipped", reason=str(exc)))
        else:
            rho = column_norms(omega)
            y = inst.y.copy()
            res, elapsed, err = _timed(lambda: omp1d(omega, rho, y, omp_cfg), cfg.warmup)
            del omega
            results["1d"] = res
            records.append(_record(inst, "1d", trial_index, res, elapsed, err))

    if cfg.algo in ("2d", "both"):
        res, elapsed, err = _timed(lambda: omp2d(inst.dictionary, inst.Y, omp_cfg), cfg.warmup)
        results["2d"] = res
        records.append(_record(inst, "2d", trial_index, res, elapsed, err))

    if cfg.check_equivalence and len(results) == 2:
        ok, why = compare_results(results["1d"], results["2d"], n)
        if not ok:
            log.error("n=%d m=%d k=%d trial=%d: not equivalent: %s", n, m, k, trial_index, why)
        for rec in records:
            if rec.status != "skipped":
                rec.equivalent = ok
    return records


def run_sweep(cfg: SweepConfig) -> list[BenchRecord]:
    """All ``m x k x trial`` cells; per-trial failures never abort the sweep."""
    cfg.validate()
    cells = [(m, k, t) for m in cfg.m_list for k in cfg.k_values for t in range(cfg.trials)]

    def one(cell):
        m, k, t = cell
        try:
            return run_trial(cfg.n, m, k, t, cfg)
        except Exception as exc:  # recorded, sweep continues
            log.exception("n=%d m=%d k=%d trial=%d failed", cfg.n, m, k, t)
            return [BenchRecord(cfg.n, m, k, t, cfg.algo, status="error", reason=repr(exc))]

    records: list[BenchRecord] = []
    if cfg.parallel > 1:
        log.warning("parallel mode: wall times are not comparable across trials")
        with ThreadPoolExecutor(cfg.parallel) as pool:
            for recs in pool.map(one, cells):
                records.extend(recs)
    else:
        last_cell = None
        for cell in cells:
            if cell[:2] != last_cell:
                last_cell = cell[:2]
                log.info("n=%d m=%d k=%d: %d trials", cfg.n, cell[0], cell[1], cfg.trials)
            records.extend(one(cell))
    records.sort(key=lambda r: (r.m, r.k, r.trial, r.algo))
    return records


def summarize(records) -> list[SummaryRow]:
    """Per-(n, m, k) cell means and speedup ``mean_1d / mean_2d``.

    With the same trial count per algorithm this is the ratio of total
    times. Cells missing either algorithm get ``nan`` speedup.
    """
    cells: dict[tuple, dict] = {}
    for r in records:
        if r.status not in ("ok", "degenerate"):
            continue
        c = cells.setdefault((r.n, r.m, r.k), {"1d": [], "2d": [], "trials": set()})
        c[r.algo].append(r.wall_time_ns)
        c["trials"].add(r.trial)
    rows = []
    for (n, m, k), c in sorted(cells.items(), key=lambda kv: (kv[0][1], kv[0][2], kv[0][0])):
        t1 = float(np.mean(c["1d"])) if c["1d"] else math.nan
        t2 = float(np.mean(c["2d"])) if c["2d"] else math.nan
        speedup = t1 / t2 if c["1d"] and c["2d"] else math.nan
        rows.append(SummaryRow(n, m, k, len(c["trials"]), t1, t2, speedup))
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def emit_csv(records, summary, out_path) -> tuple[Path, Path]:
    """Write ``<out>.trials.csv`` and ``<out>.summary.csv``."""
    out = str(out_path)
    trials_path = Path(out + ".trials.csv")
    summary_path = Path(out + ".summary.csv")
    rows = sorted(
        (r for r in records if r.status in ("ok", "degenerate")),
        key=lambda r: (r.m, r.k, r.trial, r.algo),
    )
    try:
        with open(trials_path, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRIALS_HEADER)
            for r in rows:
                w.writerow([_fmt(getattr(r, col)) for col in TRIALS_HEADER])
        with open(summary_path, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_HEADER)
            for s in sorted(summary, key=lambda s: (s.m, s.k)):
                w.writerow([_fmt(getattr(s, col)) for col in SUMMARY_HEADER])
    except OSError as exc:
        raise OSError(f"cannot write benchmark CSV under {out!r}: {exc}") from exc
    return trials_path, summary_path
