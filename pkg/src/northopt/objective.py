"""Design objectives over task sets, and the method-comparison gap metric.

The built-in objective models control performance: each task contributes a
weighted period plus a weighted response time,

    F = sum_i (alpha_i * T_i + beta_i * r_i)

with the response times supplied by the schedulability oracle so objective
and constraint always agree on the same analysis. The objective is undefined
at infeasible points (response times may have diverged there), so evaluating
one raises :class:`InfeasiblePointError` instead of returning a penalty.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .analysis import AnalysisVerdict, SchedOracle
from .model import ObjectiveWeights, TaskSet, VariableBounds

__all__ = [
    "InfeasiblePointError",
    "ObjectiveFn",
    "ProblemSpec",
    "control_objective",
    "objective_gap",
]

# Evaluation contract shared by all objectives.
ObjectiveFn = Callable[[TaskSet, ObjectiveWeights, SchedOracle], float]


class InfeasiblePointError(RuntimeError):
    """Raised when an objective is evaluated at an unschedulable point.

    Carries the oracle's verdict so callers (feasibility backtracking,
    variable elimination) can reuse the miss information without a second
    oracle query.
    """

    def __init__(self, verdict: AnalysisVerdict):
        super().__init__("objective evaluated at an infeasible point")
        self.verdict = verdict


def control_objective(ts: TaskSet, weights: ObjectiveWeights, oracle: SchedOracle) -> float:
    """Weighted sum of periods and response times.

    Needs a detail-providing oracle unless every beta weight is zero, in
    which case the response-time term vanishes and no oracle query is made
    (this keeps the objective usable under a strictly boolean black box).
    """
    n = ts.n_tasks
    if len(weights.alpha) != n or len(weights.beta) != n:
        raise ValueError(f"weights must have length {n}")

    needs_response_times = any(b != 0.0 for b in weights.beta)
    if needs_response_times and not oracle.provides_details:
        raise ValueError("objective needs response times, but the oracle is boolean-only")

    verdict = oracle(ts)
    if not verdict.schedulable:
        raise InfeasiblePointError(verdict)

    total = 0.0
    for t in ts.tasks:
        total += weights.alpha[t.id] * t.period
    if needs_response_times:
        assert verdict.response_times is not None
        for t in ts.tasks:
            r = verdict.response_times[t.id]
            if r == float("inf"):
                raise InfeasiblePointError(verdict)
            total += weights.beta[t.id] * r
    return total


def objective_gap(f_a: float, f_b: float) -> float:
    """Relative gap of method A versus method B, in percent.

    Negative means A achieved the lower (better) objective. Undefined for
    ``f_b == 0``.
    """
    if f_b == 0:
        raise ZeroDivisionError("objective_gap undefined for a zero baseline")
    return (f_a - f_b) / f_b * 100.0


@dataclass(frozen=True)
class ProblemSpec:
    """Everything the optimizer needs: weights, bounds, objective, oracle."""

    weights: ObjectiveWeights
    bounds: VariableBounds
    oracle: SchedOracle
    objective: ObjectiveFn = field(default=control_objective)

    def evaluate(self, ts: TaskSet) -> float:
        """Objective at ``ts``; raises InfeasiblePointError when unschedulable."""
        return self.objective(ts, self.weights, self.oracle)

    def is_feasible(self, ts: TaskSet) -> AnalysisVerdict:
        return self.oracle(ts)
