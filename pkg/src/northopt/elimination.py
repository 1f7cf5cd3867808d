"""Variable elimination: rescue progress after the continuous descent stalls.

When the last proposed step was rejected for breaking schedulability, two
recoveries are tried in order:

  1. search the sub-space of that step for a feasible descent direction by
     zeroing coordinate subsets (single coordinates first, then the
     coordinates of the deadline-missing tasks);
  2. failing that, freeze the period variables of the tasks that missed
     their deadline, so later descent rounds are no longer constrained by
     them.

With a boolean-only oracle the miss set is unknown; blame is then assigned
by probing each coordinate's solo step, with a largest-step tie-break so a
round always makes progress. Frozen variables are never revisited.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .analysis import AnalysisVerdict
from .descent import ACCEPT_EPS, OptState
from .model import apply_assignment
from .objective import InfeasiblePointError, ProblemSpec

__all__ = ["VeOutcome", "subspace_search", "eliminate_missing", "reformulate"]


@dataclass(frozen=True)
class VeOutcome:
    """Result of one elimination round."""

    kind: str  # "found_direction" | "eliminated" | "exhausted"
    direction: np.ndarray | None = None
    newly_frozen: frozenset[int] = frozenset()

    @classmethod
    def exhausted(cls) -> "VeOutcome":
        return cls(kind="exhausted")


def _apply_free_delta(state: OptState, delta: np.ndarray, problem: ProblemSpec):
    free = state.free_ids()
    periods = state.taskset.periods
    periods[free] += delta
    np.clip(periods, problem.bounds.lower, problem.bounds.upper, out=periods)
    return apply_assignment(state.taskset, periods=periods)


def subspace_search(
    state: OptState,
    last_delta: np.ndarray,
    problem: ProblemSpec,
    budget: int,
    miss_ids: Iterable[int] | None = None,
) -> VeOutcome:
    """Look for a feasible descent direction inside the rejected step.

    Candidates are the step with one coordinate zeroed (each in turn), then
    the step with all deadline-missing coordinates zeroed. A candidate wins
    if the full-length move is schedulable and strictly decreases the
    objective; each candidate costs one oracle call against ``budget``.
    """
    free = state.free_ids()
    delta = np.asarray(last_delta, dtype=float)
    if delta.shape != (len(free),):
        raise ValueError(f"delta must have one entry per free variable ({len(free)})")
    if budget <= 0 or not np.any(delta):
        return VeOutcome.exhausted()

    candidates: list[np.ndarray] = []
    seen: set[tuple[float, ...]] = set()

    def add(cand: np.ndarray) -> None:
        key = tuple(cand)
        if np.any(cand) and key not in seen:
            seen.add(key)
            candidates.append(cand)

    for k in range(len(free)):
        if delta[k] != 0.0:
            cand = delta.copy()
            cand[k] = 0.0
            add(cand)
    if miss_ids is not None:
        positions = [p for p, tid in enumerate(free) if tid in set(miss_ids)]
        if positions:
            cand = delta.copy()
            cand[positions] = 0.0
            add(cand)

    calls = 0
    for cand in candidates:
        if calls >= budget:
            break
        calls += 1
        try:
            value = problem.evaluate(_apply_free_delta(state, cand, problem))
        except InfeasiblePointError:
            continue
        if value < state.objective_value - ACCEPT_EPS:
            return VeOutcome(kind="found_direction", direction=cand)
    return VeOutcome.exhausted()


def eliminate_missing(
    state: OptState,
    trial_verdict: AnalysisVerdict | None,
    problem: ProblemSpec,
    last_delta: np.ndarray,
) -> VeOutcome:
    """Freeze the variables blamed for the rejected trial's infeasibility.

    With a detail-providing oracle the blame is the trial's miss set. Under
    a boolean-only oracle each coordinate's solo step is probed instead, and
    if nothing is blamed the largest-magnitude coordinate is frozen so the
    round cannot spin in place.
    """
    free = state.free_ids()
    if not free:
        return VeOutcome.exhausted()
    delta = np.asarray(last_delta, dtype=float)

    if trial_verdict is not None and trial_verdict.miss_set is not None:
        newly = trial_verdict.miss_set & set(free)
        if not newly:
            return VeOutcome.exhausted()
        return VeOutcome(kind="eliminated", newly_frozen=frozenset(newly))

    blamed: list[int] = []
    for pos, tid in enumerate(free):
        if delta[pos] == 0.0:
            continue
        solo = np.zeros_like(delta)
        solo[pos] = delta[pos]
        verdict = problem.oracle(_apply_free_delta(state, solo, problem))
        if not verdict.schedulable:
            blamed.append(tid)
    if not blamed:
        if not np.any(delta):
            return VeOutcome.exhausted()
        blamed = [free[int(np.argmax(np.abs(delta)))]]
    return VeOutcome(kind="eliminated", newly_frozen=frozenset(blamed))


def reformulate(state: OptState, outcome: VeOutcome, problem: ProblemSpec) -> OptState:
    """Fold an elimination outcome into the iterate for the next round.

    A found direction moves the point (re-evaluated, so an infeasible
    direction would be caught here); an elimination enlarges the frozen set
    and keeps every period exactly as it is.
    """
    if outcome.kind == "found_direction":
        assert outcome.direction is not None
        taskset = _apply_free_delta(state, outcome.direction, problem)
        value = problem.evaluate(taskset)
        return replace(state, taskset=taskset, objective_value=value)
    if outcome.kind == "eliminated":
        return replace(state, frozen=state.frozen | outcome.newly_frozen)
    raise ValueError("nothing to reformulate: elimination round was exhausted")
