"""Random-matrix benchmark harness and runtime-scaling study.

A bw-bit random matrix samples entries uniformly from the closed range
[2**(bw-1) + 1, 2**bw - 1]; inputs are 8-bit signed integers. The reported
cpu time is the optimizer's own wall time (a monotonic clock around solve
only; verification is never included).
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .cse import solve
from .fxp import BitWidthSpec, qint_from_fixed
from .verify import splitmix64


def random_matrix(m: int, bw: int, seed: int):
    """Deterministic m x m matrix with entries uniform in [2**(bw-1)+1, 2**bw - 1]."""
    if bw < 2:
        raise ValueError("bw must be >= 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    lo = (1 << (bw - 1)) + 1
    span = (1 << bw) - 1 - lo + 1
    gen = splitmix64(seed)
    return [[lo + next(gen) % span for _ in range(m)] for _ in range(m)]


@dataclass(frozen=True)
class TrialRecord:
    size: int
    seed: int
    step: int
    adders: int
    cpu_ms: float


@dataclass(frozen=True)
class BenchRow:
    size: int
    trials: int
    mean_step: float
    mean_adders: float
    mean_cpu_ms: float
    records: tuple[TrialRecord, ...]


def _default_jobs() -> int:
    env = os.environ.get("CMVM_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_trial(args) -> TrialRecord:
    m, bw, dc, seed, weighted, input_bits = args
    matrix = random_matrix(m, bw, seed)
    qints = [qint_from_fixed(BitWidthSpec(1, input_bits, input_bits))] * m
    sol = solve(matrix, qints, [0] * m, dc, weighted=weighted)
    return TrialRecord(m, seed, sol.stats.depth, sol.stats.adders, sol.stats.runtime_ms)


def run_suite(
    sizes,
    bw: int = 8,
    dc: int = -1,
    trials: int = 25,
    seed: int = 0,
    *,
    weighted: bool = True,
    input_bits: int = 8,
    jobs: int | None = None,
):
    """Solve `trials` random matrices per size; per-trial seeds are seed+0..trials-1.

    Adder/step statistics are reproducible for fixed arguments; cpu times are
    not. Trials may run in a process pool; records are merged by trial index.
    """
    jobs = jobs if jobs is not None else _default_jobs()
    tasks = [
        (m, bw, dc, seed + t, weighted, input_bits)
        for m in sizes
        for t in range(trials)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_trial, tasks, chunksize=1))
    else:
        records = [_run_trial(t) for t in tasks]
    rows = []
    for si, m in enumerate(sizes):
        recs = records[si * trials : (si + 1) * trials]
        rows.append(
            BenchRow(
                size=m,
                trials=trials,
                mean_step=sum(r.step for r in recs) / trials,
                mean_adders=sum(r.adders for r in recs) / trials,
                mean_cpu_ms=sum(r.cpu_ms for r in recs) / trials,
                records=tuple(recs),
            )
        )
    return rows


def suite_to_csv(rows) -> str:
    lines = ["size,trials,mean_step,mean_adders,mean_cpu_ms"]
    for r in rows:
        lines.append(
            f"{r.size},{r.trials},{r.mean_step:.4f},{r.mean_adders:.4f},{r.mean_cpu_ms:.4f}"
        )
    return "\n".join(lines) + "\n"


def suite_to_json(rows) -> str:
    payload = [
        {
            "size": r.size,
            "trials": r.trials,
            "mean_step": r.mean_step,
            "mean_adders": r.mean_adders,
            "mean_cpu_ms": r.mean_cpu_ms,
            "records": [
                {
                    "seed": t.seed,
                    "step": t.step,
                    "adders": t.adders,
                    "cpu_ms": t.cpu_ms,
                }
                for t in r.records
            ],
        }
        for r in rows
    ]
    return json.dumps(payload, indent=2) + "\n"


@dataclass(frozen=True)
class ScalingResult:
    sizes: tuple[int, ...]
    mean_cpu_ms: tuple[float, ...]
    slope: float
    fit_sizes: tuple[int, ...]

    @property
    def problem_sizes(self):
        """N = m * m * bw for each measured matrix size (bw fixed at 8)."""
        return tuple(m * m * 8 for m in self.sizes)


def scaling_study(
    sizes=(8, 16, 32, 64),
    bw: int = 8,
    trials: int = 3,
    seed: int = 0,
    dc: int = -1,
    fit_min_size: int = 8,
    *,
    weighted: bool = True,
) -> ScalingResult:
    """Mean solve time per size plus the log-log slope of time vs N = m*m*bw.

    Sizes below fit_min_size are measured but excluded from the fit (constant
    overhead dominates there).
    """
    _run_trial((4, bw, dc, seed, weighted, 8))  # warm caches before timing
    means = []
    for m in sizes:
        times = []
        for t in range(trials):
            rec = _run_trial((m, bw, dc, seed + t, weighted, 8))
            times.append(rec.cpu_ms)
        means.append(sum(times) / len(times))
    pts = [
        (math.log(m * m * bw), math.log(ms))
        for m, ms in zip(sizes, means)
        if m >= fit_min_size and ms > 0
    ]
    if len(pts) >= 2:
        n = len(pts)
        sx = sum(p[0] for p in pts)
        sy = sum(p[1] for p in pts)
        sxx = sum(p[0] * p[0] for p in pts)
        sxy = sum(p[0] * p[1] for p in pts)
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    else:
        slope = float("nan")
    fit_sizes = tuple(m for m in sizes if m >= fit_min_size)
    return ScalingResult(tuple(sizes), tuple(means), slope, fit_sizes)
