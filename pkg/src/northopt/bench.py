"""Random task-set generation and the method-comparison harness.

Generation protocol: integer WCETs uniform over [1, 100]; each period upper
bound is 5x the WCET sum (so the shared initial point sits at utilization
0.2); objective weights uniform over [1, 1000] and [1, 10000]. All draws
come from numpy's default PCG64 generator seeded with ``seed + set_index``,
so any single set can be regenerated without replaying the whole batch.

The harness runs the continuous-only method ("north") and the co-design
method ("north+rm") from the same initial point on every set and reports
per-set objectives, the relative gap in percent (negative: co-design won),
and wall times. Sets are independent, so the harness can fan out across a
process pool; records are merged by set id, keeping output deterministic.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import ObjectiveWeights, TaskSet, VariableBounds, make_taskset
from .objective import objective_gap
from .orchestrator import RunConfig, Solution, make_problem, optimize

__all__ = [
    "GenParams",
    "SetRecord",
    "BenchReport",
    "generate_taskset",
    "run_benchmark",
    "summarize",
    "write_csv",
    "write_summary",
    "CSV_HEADER",
    "GAP_HISTOGRAM_EDGES",
]

CSV_HEADER = (
    "set_id,seed,n_tasks,f_north,f_plus,gap_percent,"
    "t_north_ms,t_plus_ms,status_north,status_plus"
)

GAP_HISTOGRAM_EDGES = (-100.0, -40.0, -30.0, -20.0, -10.0, -5.0, 0.0, 5.0, 10.0, math.inf)


@dataclass(frozen=True)
class GenParams:
    """Knobs of the random task-set generator."""

    n_tasks: int
    wcet_range: tuple[int, int] = (1, 100)
    period_cap_factor: float = 5.0
    alpha_range: tuple[float, float] = (1.0, 1000.0)
    beta_range: tuple[float, float] = (1.0, 10000.0)
    seed: int = 0

    def __post_init__(self):
        if self.n_tasks < 1:
            raise ValueError("n_tasks must be at least 1")
        for name, rng in (("wcet_range", self.wcet_range),
                          ("alpha_range", self.alpha_range),
                          ("beta_range", self.beta_range)):
            if rng[0] > rng[1]:
                raise ValueError(f"{name} is empty: {rng}")
        if self.wcet_range[0] < 1:
            raise ValueError("wcet_range must start at 1 or above")
        if self.period_cap_factor <= 0:
            raise ValueError("period_cap_factor must be positive")


def generate_taskset(
    params: GenParams, set_index: int = 0
) -> tuple[TaskSet, ObjectiveWeights, VariableBounds]:
    """Draw one task set plus weights and bounds, deterministically.

    Periods start at their upper bound and priorities at the rate-monotonic
    order (the id order, since all upper bounds coincide).
    """
    rng = np.random.default_rng(params.seed + set_index)
    n = params.n_tasks
    wcets = rng.integers(params.wcet_range[0], params.wcet_range[1],
                         size=n, endpoint=True).astype(float)
    alpha = rng.uniform(params.alpha_range[0], params.alpha_range[1], size=n)
    beta = rng.uniform(params.beta_range[0], params.beta_range[1], size=n)

    bounds = VariableBounds(
        period_min=tuple(wcets),
        period_max=tuple(float(params.period_cap_factor * wcets.sum()) for _ in range(n)),
    )
    ts = make_taskset(wcets, periods=bounds.period_max)
    weights = ObjectiveWeights(alpha=tuple(alpha), beta=tuple(beta))
    return ts, weights, bounds


@dataclass(frozen=True)
class SetRecord:
    set_id: int
    seed: int
    n_tasks: int
    f_north: float
    f_plus: float
    gap_percent: float
    t_north_ms: float
    t_plus_ms: float
    status_north: str
    status_plus: str


@dataclass(frozen=True)
class BenchReport:
    params: GenParams
    records: tuple[SetRecord, ...]
    summary: dict


def _timed_run(ts: TaskSet, weights, bounds, cfg: RunConfig) -> tuple[Solution, float]:
    problem = make_problem(ts, weights, bounds)
    t0 = time.perf_counter()
    sol = optimize(ts, problem, cfg)
    return sol, (time.perf_counter() - t0) * 1000.0


def _bench_one(args: tuple[GenParams, int, RunConfig]) -> SetRecord:
    params, set_id, cfg = args
    ts, weights, bounds = generate_taskset(params, set_id)

    north_cfg = replace(cfg, method="north", seed=params.seed + set_id)
    plus_cfg = replace(cfg, method="north+rm", seed=params.seed + set_id)
    sol_north, t_north = _timed_run(ts, weights, bounds, north_cfg)
    sol_plus, t_plus = _timed_run(ts, weights, bounds, plus_cfg)

    ok = (sol_north.status != "initial_infeasible"
          and sol_plus.status != "initial_infeasible")
    gap = (objective_gap(sol_plus.objective_value, sol_north.objective_value)
           if ok else math.nan)
    return SetRecord(
        set_id=set_id,
        seed=params.seed + set_id,
        n_tasks=params.n_tasks,
        f_north=sol_north.objective_value,
        f_plus=sol_plus.objective_value,
        gap_percent=gap,
        t_north_ms=t_north,
        t_plus_ms=t_plus,
        status_north=sol_north.status,
        status_plus=sol_plus.status,
    )


def run_benchmark(params: GenParams, n_sets: int, cfg: RunConfig | None = None,
                  workers: int = 1) -> BenchReport:
    """Compare both methods on ``n_sets`` generated sets; merge by set id."""
    if n_sets < 1:
        raise ValueError("n_sets must be at least 1")
    if cfg is None:
        cfg = RunConfig()
    jobs = [(params, i, cfg) for i in range(n_sets)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_bench_one, jobs, chunksize=1))
    else:
        records = [_bench_one(job) for job in jobs]
    records.sort(key=lambda r: r.set_id)
    return BenchReport(params=params, records=tuple(records),
                       summary=summarize(records))


def summarize(records: Sequence[SetRecord] | BenchReport) -> dict:
    """Aggregate gap statistics and runtimes over the usable records."""
    if isinstance(records, BenchReport):
        records = records.records
    if not records:
        raise ValueError("cannot summarize an empty report")

    usable = [r for r in records
              if r.status_north != "initial_infeasible"
              and r.status_plus != "initial_infeasible"]
    gaps = np.array([r.gap_percent for r in usable], dtype=float)
    counts, _ = (np.histogram(gaps, bins=np.array(GAP_HISTOGRAM_EDGES))
                 if gaps.size else (np.zeros(len(GAP_HISTOGRAM_EDGES) - 1, dtype=int), None))
    return {
        "count": len(records),
        "excluded": len(records) - len(usable),
        "mean_gap_percent": float(np.mean(gaps)) if gaps.size else math.nan,
        "median_gap_percent": float(np.median(gaps)) if gaps.size else math.nan,
        "min_gap_percent": float(np.min(gaps)) if gaps.size else math.nan,
        "max_gap_percent": float(np.max(gaps)) if gaps.size else math.nan,
        "gap_histogram": {
            "edges": list(GAP_HISTOGRAM_EDGES),
            "counts": [int(c) for c in counts],
        },
        "mean_t_north_ms": float(np.mean([r.t_north_ms for r in records])),
        "mean_t_plus_ms": float(np.mean([r.t_plus_ms for r in records])),
        "generator": "numpy.random.default_rng (PCG64), seed = base seed + set index",
    }


def _fmt(x: float) -> str:
    return format(x, ".6g")


def write_csv(report: BenchReport | Iterable[SetRecord], path: str | Path) -> None:
    records = report.records if isinstance(report, BenchReport) else report
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for r in records:
            writer.writerow([
                r.set_id, r.seed, r.n_tasks,
                _fmt(r.f_north), _fmt(r.f_plus), _fmt(r.gap_percent),
                _fmt(r.t_north_ms), _fmt(r.t_plus_ms),
                r.status_north, r.status_plus,
            ])


def _json_safe(obj):
    """Strict JSON has no inf/nan; map them to strings/null."""
    if isinstance(obj, float) and not math.isfinite(obj):
        if math.isnan(obj):
            return None
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def write_summary(summary: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_json_safe(summary), fh, indent=2)
        fh.write("\n")
