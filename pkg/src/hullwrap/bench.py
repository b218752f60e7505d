"""Empirical scaling study: timed contraction runs over a size series."""
from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .contraction import ContractionConfig, Outcome, contract
from .errors import ConfigError
from .mesh_io import GENERATORS, generate_cloud
from .validation import validate

#: total-time slope above which the run is treated as a hard failure
HARD_SLOPE = 2.5
#: soft target for the total-time slope
SOFT_SLOPE = 2.2
#: allowed gap between the sort-phase slope and the (n-m) log(n-m) reference
SORT_SLOPE_TOL = 0.5

TIMING_FIELDS = ("t_hull", "t_prioritize", "t_insert_guard", "t_validate", "t_total")


@dataclass
class BenchRecord:
    generator: str
    n: int
    seed: int
    repeat: int
    hull_vertices: int
    insertions: int
    n_minus_m: int
    n_over_100: float
    passes: int
    outcome: str
    valid: bool
    final_metric: float
    t_hull: float
    t_prioritize: float
    t_insert_guard: float
    t_validate: float
    t_total: float

    def key(self) -> tuple:
        """Columns that must agree between repeats (everything but timings and the repeat index)."""
        return tuple(getattr(self, f.name) for f in fields(self)
                     if f.name not in TIMING_FIELDS and f.name != "repeat")


def thread_count() -> int:
    """Worker processes for independent runs, from ``HULLWRAP_THREADS``.

    Unset means 1 (serial, cleanest timings); 0 means one per CPU.
    """
    raw = os.environ.get("HULLWRAP_THREADS", "").strip()
    if not raw:
        return 1
    try:
        k = int(raw)
    except ValueError:
        raise ConfigError(f"HULLWRAP_THREADS must be an integer, got {raw!r}") from None
    if k < 0:
        raise ConfigError("HULLWRAP_THREADS must be >= 0")
    return k or (os.cpu_count() or 1)


def run_one(generator: str, n: int, seed: int, repeat: int = 0,
            config: ContractionConfig | None = None) -> BenchRecord:
    cloud = generate_cloud(f"{generator}({n},{seed})")
    t0 = time.perf_counter()
    result = contract(cloud, config)
    t1 = time.perf_counter()
    report = validate(result.mesh, cloud)
    t2 = time.perf_counter()
    tm = result.timings
    return BenchRecord(
        generator=generator, n=len(cloud), seed=seed, repeat=repeat,
        hull_vertices=result.hull_vertices, insertions=result.insertions,
        n_minus_m=len(cloud) - result.hull_vertices, n_over_100=len(cloud) / 100,
        passes=result.passes, outcome=result.outcome.value, valid=report.passed,
        final_metric=report.metric,
        t_hull=tm["hull"], t_prioritize=tm["prioritize"], t_insert_guard=tm["insert_guard"],
        t_validate=t2 - t1, t_total=t2 - t0)


def _run_args(args):
    return run_one(*args)


def run_bench(sizes, generator: str = "ball-uniform", repeats: int = 1, seed: int = 0,
              threads: int | None = None) -> list[BenchRecord]:
    """One record per (size, repeat). Repeats reuse the seed, so they differ
    only in timings."""
    sizes = [int(n) for n in sizes]
    if not sizes or any(n < 4 for n in sizes):
        raise ConfigError("sizes must be integers >= 4")
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    if generator not in GENERATORS:
        raise ConfigError(f"unknown generator {generator!r}; choose from {', '.join(GENERATORS)}")
    jobs = [(generator, n, seed, r) for n in sizes for r in range(repeats)]
    threads = thread_count() if threads is None else threads
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            return list(pool.map(_run_args, jobs))
    return [run_one(*job) for job in jobs]


def records_csv(records: list[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in fields(BenchRecord)]
    w.writerow(names)
    for r in records:
        row = []
        for name in names:
            v = getattr(r, name)
            row.append(repr(v) if isinstance(v, float) else str(v).lower() if isinstance(v, bool) else v)
        w.writerow(row)
    return buf.getvalue()


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.maximum(np.asarray(y, dtype=float), 1e-9))
    if len(x) < 2 or np.ptp(x) == 0:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


def summarize(records: list[BenchRecord]) -> dict:
    """Fitted slopes, soft and hard checks, and insertion accounting."""
    sizes = sorted({r.n for r in records})
    med = {}
    for name in TIMING_FIELDS:
        med[name] = [float(np.median([getattr(r, name) for r in records if r.n == n])) for n in sizes]
    slopes = {name[2:]: loglog_slope(sizes, med[name]) for name in TIMING_FIELDS}

    # reference for the sort phase: (n - m) log(n - m), with m taken per size
    nm = [float(np.median([r.n_minus_m for r in records if r.n == n])) for n in sizes]
    ref = [k * math.log(k) if k > 1 else 1.0 for k in nm]
    sort_ref = loglog_slope(sizes, ref)

    accounting = []
    for r in records:
        accounting.append({
            "n": r.n, "repeat": r.repeat, "outcome": r.outcome, "insertions": r.insertions,
            "n_minus_m": r.n_minus_m, "n_over_100": r.n_over_100,
            "insertions_equal_n_minus_m": r.outcome != Outcome.COMPLETE.value or r.insertions == r.n_minus_m,
            "n_over_100_discrepancy": not math.isclose(r.insertions, r.n_over_100),
        })
    total = slopes["total"]
    return {
        "sizes": sizes,
        "median_times": med,
        "slopes": slopes,
        "sort_reference_slope": sort_ref,
        "sort_slope_consistent": abs(slopes["prioritize"] - sort_ref) <= SORT_SLOPE_TOL,
        "total_slope_within_soft": total <= SOFT_SLOPE,
        "total_slope_hard_fail": total > HARD_SLOPE,
        "all_complete": all(r.outcome == Outcome.COMPLETE.value for r in records),
        "all_valid": all(r.valid for r in records),
        "insertion_accounting": accounting,
    }


def discrepancy_lines(records: list[BenchRecord]) -> list[str]:
    """Human-readable n - m versus n/100 comparison, one line per record."""
    out = []
    for r in records:
        flag = "DISCREPANCY" if not math.isclose(r.insertions, r.n_over_100) else "match"
        out.append(f"n={r.n} repeat={r.repeat} outcome={r.outcome} insertions={r.insertions} "
                   f"n-m={r.n_minus_m} n/100={r.n_over_100:g} -> {flag}")
    return out
