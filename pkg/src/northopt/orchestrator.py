"""The outer co-design loop: alternate continuous and discrete optimization.

Each outer iteration of the "north+<policy>" methods first lets the priority
heuristic re-rank the tasks (adopted only if the new permutation keeps the
system schedulable and does not worsen the objective), then descends the
periods with priorities held constant, then runs variable elimination on the
last rejected step. The plain "north" method skips the discrete step and
keeps the initial rate-monotonic ranks throughout.

Every adopted state is feasible and the objective never increases across the
trace; the run is fully deterministic for a given configuration.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from .analysis import RtaOracle, SchedOracle
from .descent import DescentConfig, OptState, run_descent
from .elimination import eliminate_missing, reformulate, subspace_search
from .model import (
    ObjectiveWeights,
    TaskSet,
    VariableBounds,
    apply_assignment,
    problem_to_dict,
    validate_taskset,
)
from .objective import InfeasiblePointError, ObjectiveFn, ProblemSpec, control_objective
from .priorities import PriorityPolicy, assign_rm

__all__ = [
    "METHODS",
    "RunConfig",
    "TraceEntry",
    "Solution",
    "CountingOracle",
    "make_problem",
    "initial_solution",
    "optimize",
    "run_north_baseline",
    "solution_to_dict",
    "save_solution",
]

METHODS = ("north", "north+rm", "north+dkc")


class CountingOracle:
    """Per-run wrapper counting oracle queries; not shared across runs."""

    def __init__(self, inner: SchedOracle):
        self.inner = inner
        self.calls = 0

    @property
    def provides_details(self) -> bool:
        return self.inner.provides_details

    def __call__(self, ts: TaskSet):
        self.calls += 1
        return self.inner(ts)


@dataclass(frozen=True)
class RunConfig:
    """One optimization run's full configuration."""

    method: str = "north+rm"
    dkc_k: float = 1.0
    seed: int = 0
    max_outer: int = 50
    outer_rel_tol: float = 1e-3
    descent: DescentConfig | None = None  # None: scaled to the period bounds
    record_iterates: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")
        if self.outer_rel_tol <= 0:
            raise ValueError("outer_rel_tol must be positive")

    def policy(self) -> PriorityPolicy | None:
        if self.method == "north":
            return None
        if self.method == "north+rm":
            return PriorityPolicy("rm")
        return PriorityPolicy("dkc", self.dkc_k)


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    objective: float
    frozen: int
    priorities: tuple[int, ...]
    oracle_calls: int
    ms: float


@dataclass(frozen=True)
class Solution:
    """Final iterate of one run plus its per-iteration trace."""

    taskset: TaskSet
    objective_value: float
    status: str  # converged | max_outer | initial_infeasible
    trace: tuple[TraceEntry, ...]
    method: str
    seed: int
    iterates: tuple[TaskSet, ...] = field(default=(), repr=False)


def make_problem(
    ts: TaskSet,
    weights: ObjectiveWeights | None = None,
    bounds: VariableBounds | None = None,
    oracle: SchedOracle | None = None,
    objective: ObjectiveFn = control_objective,
) -> ProblemSpec:
    """Assemble a ProblemSpec with the battle-tested defaults.

    The default oracle is the fast response-time analysis; weights default
    to 1 everywhere and bounds to [wcet, 5 * sum(wcet)].
    """
    n = ts.n_tasks
    if weights is None:
        weights = ObjectiveWeights.uniform(n)
    if bounds is None:
        bounds = VariableBounds.defaults([t.wcet for t in ts.tasks])
    if oracle is None:
        oracle = RtaOracle(exact=False)
    return ProblemSpec(weights=weights, bounds=bounds, oracle=oracle, objective=objective)


def initial_solution(ts: TaskSet, problem: ProblemSpec) -> OptState | None:
    """Start at the period upper bounds with rate-monotonic priorities.

    Under the default bounds this point has utilization 0.2 and is always
    schedulable; None signals that even the initial point is infeasible.
    """
    start = apply_assignment(ts, periods=list(problem.bounds.period_max))
    start = apply_assignment(start, priorities=assign_rm(start))
    try:
        value = problem.evaluate(start)
    except InfeasiblePointError:
        return None
    return OptState(taskset=start, objective_value=value)


def optimize(ts: TaskSet, problem: ProblemSpec | None = None,
             cfg: RunConfig | None = None) -> Solution:
    """Run the full co-design loop and return the solution with its trace."""
    if problem is None:
        problem = make_problem(ts)
    if cfg is None:
        cfg = RunConfig()

    # The input periods are only a container (the run starts at the period
    # upper bounds), so bounds conformance is checked on the start point.
    violations = validate_taskset(ts)
    if not violations:
        try:
            start_point = apply_assignment(ts, periods=list(problem.bounds.period_max))
            violations = validate_taskset(start_point, problem.bounds)
        except ValueError as exc:
            violations = [str(exc)]
    if violations:
        raise ValueError("invalid task set: " + "; ".join(violations))

    oracle = CountingOracle(problem.oracle)
    problem = replace(problem, oracle=oracle)
    descent_cfg = cfg.descent or DescentConfig.scaled_to(problem.bounds)
    policy = cfg.policy()

    t0 = time.perf_counter()
    state = initial_solution(ts, problem)
    if state is None:
        return Solution(
            taskset=ts,
            objective_value=math.nan,
            status="initial_infeasible",
            trace=(),
            method=cfg.method,
            seed=cfg.seed,
        )

    iterates: list[TaskSet] = [state.taskset] if cfg.record_iterates else []

    def continuous_round(start: OptState, outer: int,
                         collect: list[TaskSet] | None):
        """One descent pass plus variable elimination on its rejected step."""
        on_accept: Callable[[OptState], None] | None = None
        if collect is not None:
            on_accept = lambda s: collect.append(s.taskset)  # noqa: E731
        result = run_descent(start, problem, descent_cfg, on_accept=on_accept)
        rstate = replace(result.state, outer_iter=outer)
        ve_changed = False
        free = rstate.free_ids()
        if result.last_rejected is not None and free:
            rejected = result.last_rejected
            miss_ids = None
            if rejected.verdict is not None and rejected.verdict.miss_set is not None:
                miss_ids = rejected.verdict.miss_set
            outcome = subspace_search(rstate, rejected.delta, problem,
                                      budget=2 * len(free), miss_ids=miss_ids)
            if outcome.kind == "exhausted":
                outcome = eliminate_missing(rstate, rejected.verdict, problem,
                                            rejected.delta)
            if outcome.kind != "exhausted":
                rstate = reformulate(rstate, outcome, problem)
                ve_changed = True
                if collect is not None and outcome.kind == "found_direction":
                    collect.append(rstate.taskset)
        return rstate, result, ve_changed

    trace: list[TraceEntry] = [
        TraceEntry(0, state.objective_value, len(state.frozen),
                   state.taskset.priorities, oracle.calls,
                   (time.perf_counter() - t0) * 1000.0)
    ]

    status = "max_outer"
    failed_adoption: tuple[tuple[int, ...], tuple[float, ...]] | None = None
    for outer in range(1, cfg.max_outer + 1):
        iter_t0 = time.perf_counter()
        calls_before = oracle.calls
        prev_value = state.objective_value
        prev_perm = state.taskset.priorities
        perm_changed = False
        round_done = False
        collect = iterates if cfg.record_iterates else None

        # Discrete step: re-rank with the policy. An assignment that does not
        # worsen the objective on the spot is adopted directly; one that does
        # is still tried tentatively (it may widen the schedulable region and
        # pay off within the round) but is committed only if the round ends
        # no worse than it started, keeping the trace monotone.
        if policy is not None:
            perm = policy(state.taskset)
            periods_key = tuple(float(p) for p in state.taskset.periods)
            if perm != prev_perm and (perm, periods_key) != failed_adoption:
                candidate = apply_assignment(state.taskset, priorities=perm)
                try:
                    value = problem.evaluate(candidate)
                except InfeasiblePointError:
                    value = None
                if value is not None:
                    adopted = replace(state, taskset=candidate, objective_value=value)
                    if value <= state.objective_value:
                        state = adopted
                        perm_changed = True
                        if collect is not None:
                            collect.append(state.taskset)
                    else:
                        tentative_iterates: list[TaskSet] = []
                        t_state, t_result, t_ve = continuous_round(
                            adopted, outer,
                            tentative_iterates if collect is not None else None)
                        if t_state.objective_value <= state.objective_value:
                            if collect is not None:
                                collect.append(adopted.taskset)
                                collect.extend(tentative_iterates)
                            state, result, ve_changed = t_state, t_result, t_ve
                            perm_changed = True
                            round_done = True
                        else:
                            failed_adoption = (perm, periods_key)

        if not round_done:
            state, result, ve_changed = continuous_round(state, outer, collect)

        trace.append(TraceEntry(
            outer, state.objective_value, len(state.frozen),
            state.taskset.priorities, oracle.calls - calls_before,
            (time.perf_counter() - iter_t0) * 1000.0,
        ))

        if not state.free_ids():
            status = "converged"
            break

        next_perm = None if policy is None else policy(state.taskset)
        perm_stable = (
            policy is None
            or next_perm == state.taskset.priorities
            or (next_perm, tuple(float(p) for p in state.taskset.periods))
            == failed_adoption
        )
        no_progress = (result.status == "stationary"
                       or (result.status == "converged" and result.n_accepted == 0))
        if no_progress and not ve_changed and not perm_changed and perm_stable:
            # The round is a provable fixed point: re-running it changes nothing.
            status = "converged"
            break
        if prev_value == 0:
            rel_improvement = 0.0 if state.objective_value == 0 else math.inf
        else:
            rel_improvement = (prev_value - state.objective_value) / abs(prev_value)
        if (rel_improvement < cfg.outer_rel_tol and not perm_changed
                and not ve_changed):
            status = "converged"
            break

    return Solution(
        taskset=state.taskset,
        objective_value=state.objective_value,
        status=status,
        trace=tuple(trace),
        method=cfg.method,
        seed=cfg.seed,
        iterates=tuple(iterates),
    )


def run_north_baseline(ts: TaskSet, problem: ProblemSpec | None = None,
                       cfg: RunConfig | None = None) -> Solution:
    """The continuous-only method: priorities stay at the initial RM ranks."""
    cfg = replace(cfg, method="north") if cfg is not None else RunConfig(method="north")
    return optimize(ts, problem, cfg)


def solution_to_dict(sol: Solution, weights: ObjectiveWeights,
                     bounds: VariableBounds) -> dict:
    return {
        "objective": sol.objective_value,
        "status": sol.status,
        "method": sol.method,
        "seed": sol.seed,
        "taskset": problem_to_dict(sol.taskset, weights, bounds),
        "trace": [
            {
                "iter": e.iteration,
                "objective": e.objective,
                "frozen": e.frozen,
                "priorities": list(e.priorities),
                "oracle_calls": e.oracle_calls,
                "ms": e.ms,
            }
            for e in sol.trace
        ],
    }


def save_solution(path: str | Path, sol: Solution, weights: ObjectiveWeights,
                  bounds: VariableBounds) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(solution_to_dict(sol, weights, bounds), fh, indent=2)
        fh.write("\n")
