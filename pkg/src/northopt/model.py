"""Task model for periodic fixed-priority systems on a uniprocessor.

The design vector of the optimizer lives here: continuous per-task periods
and a discrete priority permutation, carried by an immutable :class:`TaskSet`.
All operations return new values; nothing is mutated in place, so task sets
are safe to share across threads and processes.

Conventions:
  * priorities are ranks in ``0..N-1``; lower rank means higher priority;
  * deadlines are implicit (``deadline == period``), and every operation
    that updates a period updates the deadline with it;
  * WCETs are generated as integers but stored as floats so a single numeric
    type flows through analysis and optimization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Task",
    "TaskSet",
    "VariableBounds",
    "ObjectiveWeights",
    "make_taskset",
    "validate_taskset",
    "utilization",
    "apply_assignment",
    "load_problem",
    "save_problem",
    "problem_to_dict",
    "problem_from_dict",
]


@dataclass(frozen=True)
class Task:
    """One periodic task: WCET, period, implicit deadline, priority rank."""

    id: int
    wcet: float
    period: float
    deadline: float
    priority: int

    @property
    def utilization(self) -> float:
        return self.wcet / self.period


@dataclass(frozen=True)
class TaskSet:
    """An ordered, immutable collection of tasks indexed by contiguous ids."""

    tasks: tuple[Task, ...]

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def wcets(self) -> np.ndarray:
        return np.array([t.wcet for t in self.tasks], dtype=float)

    @property
    def periods(self) -> np.ndarray:
        return np.array([t.period for t in self.tasks], dtype=float)

    @property
    def deadlines(self) -> np.ndarray:
        return np.array([t.deadline for t in self.tasks], dtype=float)

    @property
    def priorities(self) -> tuple[int, ...]:
        return tuple(t.priority for t in self.tasks)

    def by_priority(self) -> tuple[Task, ...]:
        """Tasks sorted from highest priority (rank 0) to lowest."""
        return tuple(sorted(self.tasks, key=lambda t: t.priority))

    def __iter__(self):
        return iter(self.tasks)


def make_taskset(
    wcets: Sequence[float],
    periods: Sequence[float],
    priorities: Sequence[int] | None = None,
    deadlines: Sequence[float] | None = None,
) -> TaskSet:
    """Build a TaskSet from parallel arrays; deadlines default to periods."""
    n = len(wcets)
    if len(periods) != n:
        raise ValueError("wcets and periods must have equal length")
    if priorities is None:
        priorities = range(n)
    if deadlines is None:
        deadlines = periods
    tasks = tuple(
        Task(
            id=i,
            wcet=float(wcets[i]),
            period=float(periods[i]),
            deadline=float(deadlines[i]),
            priority=int(priorities[i]),
        )
        for i in range(n)
    )
    return TaskSet(tasks)


@dataclass(frozen=True)
class VariableBounds:
    """Per-task period bounds; the feasible box of the continuous variables."""

    period_min: tuple[float, ...]
    period_max: tuple[float, ...]

    @classmethod
    def defaults(cls, wcets: Sequence[float], cap_factor: float = 5.0) -> "VariableBounds":
        """Lower bound each period by its WCET, upper bound by cap_factor * sum(WCET)."""
        total = float(sum(wcets))
        return cls(
            period_min=tuple(float(c) for c in wcets),
            period_max=tuple(cap_factor * total for _ in wcets),
        )

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.period_min, dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.period_max, dtype=float)


@dataclass(frozen=True)
class ObjectiveWeights:
    """Per-task weights of the period and response-time terms of the objective."""

    alpha: tuple[float, ...]
    beta: tuple[float, ...]

    @classmethod
    def uniform(cls, n: int, alpha: float = 1.0, beta: float = 1.0) -> "ObjectiveWeights":
        return cls(alpha=(float(alpha),) * n, beta=(float(beta),) * n)


def validate_taskset(ts: TaskSet, bounds: VariableBounds | None = None) -> list[str]:
    """Check every task-set invariant; return a list of violations (empty = ok).

    Violations are data, not failures: a malformed set is describable, and
    each entry names the offending task and the broken rule.
    """
    problems: list[str] = []
    n = ts.n_tasks
    if n == 0:
        problems.append("task set is empty")
        return problems

    ids = [t.id for t in ts.tasks]
    if ids != list(range(n)):
        problems.append(f"task ids are not contiguous 0..{n - 1}: {ids}")

    prios = sorted(t.priority for t in ts.tasks)
    if prios != list(range(n)):
        problems.append("priorities not a permutation of 0..%d: %s" % (n - 1, list(ts.priorities)))

    for t in ts.tasks:
        if t.wcet <= 0:
            problems.append(f"wcet must be positive for task {t.id} (got {t.wcet})")
        if t.period < t.wcet:
            problems.append(f"period < wcet for task {t.id} ({t.period} < {t.wcet})")
        if t.deadline <= 0:
            problems.append(f"deadline must be positive for task {t.id} (got {t.deadline})")
        if t.deadline != t.period:
            problems.append(
                f"implicit deadline violated for task {t.id} (deadline {t.deadline} != period {t.period})"
            )

    if bounds is not None:
        if len(bounds.period_min) != n or len(bounds.period_max) != n:
            problems.append("bounds length does not match task count")
        else:
            for t in ts.tasks:
                lo = bounds.period_min[t.id]
                hi = bounds.period_max[t.id]
                if lo > hi:
                    problems.append(f"period_min > period_max for task {t.id} ({lo} > {hi})")
                if lo < t.wcet:
                    problems.append(f"period_min < wcet for task {t.id} ({lo} < {t.wcet})")
                if not (lo <= t.period <= hi):
                    problems.append(
                        f"period out of bounds for task {t.id} ({t.period} not in [{lo}, {hi}])"
                    )
    return problems


def utilization(ts: TaskSet) -> float:
    """Total processor utilization sum(C_i / T_i)."""
    return float(sum(t.wcet / t.period for t in ts.tasks))


def _check_permutation(priorities: Iterable[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in priorities)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"priorities must be a permutation of 0..{n - 1}, got {perm}")
    return perm


def apply_assignment(
    ts: TaskSet,
    periods: Sequence[float] | None = None,
    priorities: Sequence[int] | None = None,
    bounds: VariableBounds | None = None,
) -> TaskSet:
    """Return a new TaskSet with the given periods and/or priorities.

    Deadlines follow periods (implicit deadlines). Rejects periods below the
    WCET or outside ``bounds`` when given, and any non-permutation priority
    vector; the input task set is never modified.
    """
    n = ts.n_tasks
    new_tasks = list(ts.tasks)

    if periods is not None:
        if len(periods) != n:
            raise ValueError(f"expected {n} periods, got {len(periods)}")
        for i, p in enumerate(periods):
            p = float(p)
            t = new_tasks[i]
            if p < t.wcet:
                raise ValueError(f"period {p} below wcet {t.wcet} for task {t.id}")
            if bounds is not None:
                lo, hi = bounds.period_min[i], bounds.period_max[i]
                if not (lo <= p <= hi):
                    raise ValueError(f"period {p} out of bounds [{lo}, {hi}] for task {t.id}")
            new_tasks[i] = replace(t, period=p, deadline=p)

    if priorities is not None:
        perm = _check_permutation(priorities, n)
        new_tasks = [replace(t, priority=perm[i]) for i, t in enumerate(new_tasks)]

    return TaskSet(tuple(new_tasks))


# ---------------------------------------------------------------------------
# Task-set file format (JSON), shared by every CLI command.
# ---------------------------------------------------------------------------

def problem_to_dict(ts: TaskSet, weights: ObjectiveWeights, bounds: VariableBounds) -> dict:
    return {
        "tasks": [
            {
                "id": t.id,
                "wcet": t.wcet,
                "period": t.period,
                "deadline": t.deadline,
                "priority": t.priority,
            }
            for t in ts.tasks
        ],
        "alpha": list(weights.alpha),
        "beta": list(weights.beta),
        "period_min": list(bounds.period_min),
        "period_max": list(bounds.period_max),
    }


def problem_from_dict(data: dict) -> tuple[TaskSet, ObjectiveWeights, VariableBounds]:
    try:
        raw_tasks = data["tasks"]
        tasks = tuple(
            Task(
                id=int(t["id"]),
                wcet=float(t["wcet"]),
                period=float(t["period"]),
                deadline=float(t["deadline"]),
                priority=int(t["priority"]),
            )
            for t in raw_tasks
        )
        n = len(tasks)
        weights = ObjectiveWeights(
            alpha=tuple(float(a) for a in data["alpha"]),
            beta=tuple(float(b) for b in data["beta"]),
        )
        bounds = VariableBounds(
            period_min=tuple(float(x) for x in data["period_min"]),
            period_max=tuple(float(x) for x in data["period_max"]),
        )
    except KeyError as exc:
        raise ValueError(f"task-set file is missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ValueError(f"task-set file has a malformed field: {exc}") from exc

    for name, arr in (("alpha", weights.alpha), ("beta", weights.beta),
                      ("period_min", bounds.period_min), ("period_max", bounds.period_max)):
        if len(arr) != n:
            raise ValueError(f"field {name!r} must have length {n}, got {len(arr)}")
    return TaskSet(tasks), weights, bounds


def load_problem(path: str | Path) -> tuple[TaskSet, ObjectiveWeights, VariableBounds]:
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))


def save_problem(path: str | Path, ts: TaskSet, weights: ObjectiveWeights, bounds: VariableBounds) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(problem_to_dict(ts, weights, bounds), fh, indent=2)
        fh.write("\n")
