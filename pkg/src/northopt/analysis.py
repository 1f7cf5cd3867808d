"""Schedulability analysis for fixed-priority preemptive uniprocessor scheduling.

The optimizer treats schedulability as a black box: a query maps a task set
to a verdict. The built-in analysis is the classical response-time recurrence

    r_i = C_i + sum_{j in hp(i)} ceil(r_i / T_j) * C_j

solved by fixed-point iteration from ``r = C_i``, where ``hp(i)`` is the set
of tasks with higher priority than task i. A task set is schedulable iff
every task's worst-case response time is within its deadline.

Two analysis flavours are provided:

  * ``analyze(ts)`` (exact): worst-case response times over the synchronous
    busy period. When a task's first job overruns its own period the busy
    period carries over into later jobs, which can respond even worse; the
    exact mode walks all jobs in the busy period so its numbers agree with
    discrete-event simulation tick for tick.
  * ``analyze(ts, exact=False)`` (fast): per-task fixed-point iteration that
    bails out as soon as an iterate exceeds the deadline. Verdict and miss
    set are identical to the exact mode; only the reported response times of
    deadline-missing tasks differ. This is the oracle the optimizer queries
    thousands of times per run.

``simulate_worst_response`` is an independent discrete-event simulator used
to cross-check the analysis on integer-valued task sets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import ceil, gcd, inf
from typing import Protocol, runtime_checkable

from .model import TaskSet

__all__ = [
    "AnalysisVerdict",
    "SchedOracle",
    "RtaOracle",
    "BooleanOracle",
    "response_time",
    "analyze",
    "simulate_worst_response",
    "hyperperiod",
    "as_boolean_blackbox",
]

# Iteration guards: the recurrence diverges when the higher-priority
# utilization reaches 1, and can creep slowly just below it.
_TIME_CAP = 2.0**31
_ITER_CAP = 10**6
_FIXED_POINT_EPS = 1e-9

SIM_HORIZON_CAP = 10**7


@dataclass(frozen=True)
class AnalysisVerdict:
    """Outcome of a schedulability query.

    ``response_times`` and ``miss_set`` are present only when the oracle
    exposes per-task details; a boolean-only black box reports just the
    verdict. Diverged response times are ``math.inf`` and always count as
    deadline misses.
    """

    schedulable: bool
    response_times: tuple[float, ...] | None = None
    miss_set: frozenset[int] | None = None


@runtime_checkable
class SchedOracle(Protocol):
    """A deterministic, side-effect-free schedulability query."""

    @property
    def provides_details(self) -> bool: ...

    def __call__(self, ts: TaskSet) -> AnalysisVerdict: ...


def _interference(r: float, hp: list[tuple[float, float]]) -> float:
    acc = 0.0
    for c, t in hp:
        acc += ceil(r / t) * c
    return acc


def _fixed_point(base: float, hp: list[tuple[float, float]], start: float,
                 stop_above: float | None = None) -> float:
    """Least r >= start with r = base + interference(r), or inf on divergence.

    ``stop_above`` short-circuits the iteration: the first iterate exceeding
    it is returned as-is (the caller only cares that the deadline is blown).
    """
    r = start
    for _ in range(_ITER_CAP):
        nxt = base + _interference(r, hp)
        if nxt > _TIME_CAP:
            return inf
        if stop_above is not None and nxt > stop_above:
            return nxt
        if abs(nxt - r) < _FIXED_POINT_EPS:
            return nxt
        r = nxt
    return inf


def _hp_params(ts: TaskSet, i: int) -> list[tuple[float, float]]:
    rank = ts.tasks[i].priority
    return [(t.wcet, t.period) for t in ts.tasks if t.priority < rank]


def response_time(ts: TaskSet, i: int, *, stop_above_deadline: bool = False) -> float:
    """Response time of task i's first job after a synchronous release.

    Returns the least fixed point of the classical recurrence, iterated from
    ``r = C_i``; ``math.inf`` marks divergence (higher-priority utilization
    at or above 1, or iteration caps exceeded). With ``stop_above_deadline``
    the iteration stops at the first iterate beyond the deadline and returns
    that iterate, which is enough to flag the miss.
    """
    task = ts.tasks[i]
    hp = _hp_params(ts, i)
    if sum(c / t for c, t in hp) >= 1.0:
        return inf
    stop = task.deadline if stop_above_deadline else None
    return _fixed_point(task.wcet, hp, task.wcet, stop_above=stop)


def _worst_case_response(wcet: float, period: float,
                         hp: list[tuple[float, float]]) -> float:
    """Exact worst response over the synchronous busy period.

    The first job's finishing time is the classical fixed point. If it runs
    past the task's own next release, the backlog spills into later jobs and
    the worst response may belong to one of them; walk jobs until the busy
    period closes. The busy period never closes when the utilization at this
    priority level exceeds 1 (at exactly 1 it closes at the hyperperiod), so
    that case short-circuits to divergence.
    """
    u_hp = sum(c / t for c, t in hp)
    if u_hp >= 1.0 or u_hp + wcet / period > 1.0 + 1e-9:
        return inf
    w = _fixed_point(wcet, hp, wcet)
    if w == inf:
        return inf
    worst = w
    q = 1
    while w > q * period:
        w = _fixed_point((q + 1) * wcet, hp, w + wcet)
        if w == inf or q >= _ITER_CAP:
            return inf
        worst = max(worst, w - q * period)
        q += 1
    return worst


def analyze(ts: TaskSet, *, exact: bool = True) -> AnalysisVerdict:
    """Run the response-time analysis for every task.

    Schedulable iff every response time is within its deadline and none
    diverged. The fast mode (``exact=False``) reports, for missing tasks,
    the first over-deadline iterate instead of the true worst case; verdict
    and miss set never differ between the modes.
    """
    n = ts.n_tasks
    resp = [0.0] * n
    misses: list[int] = []
    hp: list[tuple[float, float]] = []
    u_hp = 0.0
    for task in ts.by_priority():
        if exact:
            r = _worst_case_response(task.wcet, task.period, hp)
        elif u_hp >= 1.0:
            r = inf
        else:
            r = _fixed_point(task.wcet, hp, task.wcet, stop_above=task.deadline)
        resp[task.id] = r
        if not r <= task.deadline:
            misses.append(task.id)
        hp.append((task.wcet, task.period))
        u_hp += task.wcet / task.period
    return AnalysisVerdict(
        schedulable=not misses,
        response_times=tuple(resp),
        miss_set=frozenset(misses),
    )


def hyperperiod(ts: TaskSet) -> int:
    """Least common multiple of the (integer) task periods."""
    h = 1
    for t in ts.tasks:
        p = int(t.period)
        if p != t.period:
            raise ValueError(f"period of task {t.id} is not integer: {t.period}")
        h = h * p // gcd(h, p)
    return h


def simulate_worst_response(ts: TaskSet, horizon: int | None = None) -> tuple[float, ...]:
    """Discrete-event simulation of synchronous-release preemptive scheduling.

    All tasks release a job at time 0 and every period thereafter; at every
    instant the pending job of the highest-priority task runs (jobs of one
    task are served in release order). Returns the worst response time among
    each task's jobs released within the horizon; those jobs are always run
    to completion, with later releases still interfering.

    Requires integer WCETs and periods so the simulation is exact. The
    default horizon is the hyperperiod; horizons above ``SIM_HORIZON_CAP``
    are rejected.
    """
    n = ts.n_tasks
    wcets: list[int] = []
    periods: list[int] = []
    for t in ts.tasks:
        if t.wcet != int(t.wcet) or t.period != int(t.period):
            raise ValueError(f"simulation requires integer parameters (task {t.id})")
        wcets.append(int(t.wcet))
        periods.append(int(t.period))

    if horizon is None:
        horizon = hyperperiod(ts)
    horizon = int(horizon)
    if horizon > SIM_HORIZON_CAP:
        raise ValueError(f"simulation horizon {horizon} exceeds cap {SIM_HORIZON_CAP}")
    if horizon <= 0:
        return tuple(0.0 for _ in range(n))

    rank = [t.priority for t in ts.tasks]
    next_release = [0] * n
    queues: list[deque[list[int]]] = [deque() for _ in range(n)]  # [release, remaining]
    worst = [0] * n
    outstanding = 0  # pending jobs that were released before the horizon
    now = 0
    drain_limit = 4 * horizon + sum(wcets) + 16

    while True:
        for i in range(n):
            while next_release[i] <= now:
                queues[i].append([next_release[i], wcets[i]])
                if next_release[i] < horizon:
                    outstanding += 1
                next_release[i] += periods[i]

        running = -1
        for i in range(n):
            if queues[i] and (running < 0 or rank[i] < rank[running]):
                running = i
        if running < 0:
            if min(next_release) >= horizon:
                break
            now = min(next_release)
            continue

        job = queues[running][0]
        upcoming = min(next_release)
        finish = now + job[1]
        step_end = min(upcoming, finish)
        job[1] -= step_end - now
        now = step_end
        if job[1] == 0:
            queues[running].popleft()
            if job[0] < horizon:
                outstanding -= 1
                response = now - job[0]
                if response > worst[running]:
                    worst[running] = response
                if outstanding == 0 and min(next_release) >= horizon:
                    break
        if now > drain_limit:
            raise RuntimeError(
                "simulation backlog never drained; utilization is likely above 1"
            )

    return tuple(float(w) for w in worst)


@dataclass(frozen=True)
class RtaOracle:
    """Response-time-analysis oracle with per-task details.

    ``exact=False`` selects the fast verdict path used inside optimization
    loops; see :func:`analyze`.
    """

    exact: bool = True

    @property
    def provides_details(self) -> bool:
        return True

    def __call__(self, ts: TaskSet) -> AnalysisVerdict:
        return analyze(ts, exact=self.exact)


@dataclass(frozen=True)
class BooleanOracle:
    """Strict black-box view of another oracle: verdict only, no details."""

    inner: SchedOracle

    @property
    def provides_details(self) -> bool:
        return False

    def __call__(self, ts: TaskSet) -> AnalysisVerdict:
        return AnalysisVerdict(schedulable=self.inner(ts).schedulable)


def as_boolean_blackbox(oracle: SchedOracle) -> BooleanOracle:
    """Strip per-task details from an oracle, leaving the binary verdict."""
    return BooleanOracle(oracle)
