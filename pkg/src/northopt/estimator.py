"""Scikit-learn-style front end for the co-design optimizer.

``NorthOptimizer`` follows the estimator protocol: hyperparameters in
``__init__`` (so ``get_params``/``set_params``/``clone`` work), ``fit`` runs
the optimization on a task set, and fitted results live in trailing-underscore
attributes. ``transform`` returns the optimized task set, making the
optimizer usable wherever a transformer is expected.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .descent import DescentConfig
from .model import ObjectiveWeights, TaskSet, VariableBounds
from .orchestrator import METHODS, RunConfig, make_problem, optimize

__all__ = ["NorthOptimizer"]


class NorthOptimizer(BaseEstimator):
    """Co-design of task periods and priorities under schedulability constraints.

    Parameters
    ----------
    method : {"north", "north+rm", "north+dkc"}
        "north" optimizes periods only; the "+rm"/"+dkc" variants re-rank
        priorities with the named heuristic every outer iteration.
    dkc_k : float
        The k of the dkc ranking key (deadline - k * wcet).
    max_outer : int
        Outer iteration cap.
    outer_rel_tol : float
        Relative objective improvement below which the outer loop stops.
    step_threshold, fd_step, initial_trust_radius : float or None
        Length scales of the continuous descent; None derives them from the
        period upper bounds at fit time.
    backtrack_factor, max_backtracks, max_iterations :
        Backtracking and iteration limits of the continuous descent.
    seed : int
        Recorded in the solution for provenance; the optimizer itself is
        deterministic.

    Attributes
    ----------
    solution_ : Solution
        Full result including the per-iteration trace.
    taskset_ : TaskSet
        The optimized task set.
    objective_ : float
        Objective value at ``taskset_``.
    status_ : str
        "converged", "max_outer", or "initial_infeasible".
    n_outer_ : int
        Number of outer iterations performed.
    """

    def __init__(
        self,
        method: str = "north+rm",
        dkc_k: float = 1.0,
        max_outer: int = 50,
        outer_rel_tol: float = 1e-3,
        step_threshold: float | None = None,
        fd_step: float | None = None,
        initial_trust_radius: float | None = None,
        backtrack_factor: float = 0.5,
        max_backtracks: int = 30,
        max_iterations: int = 500,
        seed: int = 0,
    ):
        self.method = method
        self.dkc_k = dkc_k
        self.max_outer = max_outer
        self.outer_rel_tol = outer_rel_tol
        self.step_threshold = step_threshold
        self.fd_step = fd_step
        self.initial_trust_radius = initial_trust_radius
        self.backtrack_factor = backtrack_factor
        self.max_backtracks = max_backtracks
        self.max_iterations = max_iterations
        self.seed = seed

    def _descent_config(self, bounds: VariableBounds) -> DescentConfig:
        overrides = {
            "backtrack_factor": self.backtrack_factor,
            "max_backtracks": self.max_backtracks,
            "max_iterations": self.max_iterations,
        }
        for name in ("step_threshold", "fd_step", "initial_trust_radius"):
            value = getattr(self, name)
            if value is not None:
                overrides[name] = value
        return DescentConfig.scaled_to(bounds, **overrides)

    def fit(self, taskset: TaskSet, weights: ObjectiveWeights | None = None,
            bounds: VariableBounds | None = None) -> "NorthOptimizer":
        """Optimize the task set; weights and bounds default as in make_problem."""
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        problem = make_problem(taskset, weights, bounds)
        cfg = RunConfig(
            method=self.method,
            dkc_k=self.dkc_k,
            seed=self.seed,
            max_outer=self.max_outer,
            outer_rel_tol=self.outer_rel_tol,
            descent=self._descent_config(problem.bounds),
        )
        solution = optimize(taskset, problem, cfg)
        self.solution_ = solution
        self.taskset_ = solution.taskset
        self.objective_ = solution.objective_value
        self.status_ = solution.status
        self.trace_ = solution.trace
        self.n_outer_ = max(len(solution.trace) - 1, 0)
        return self

    def transform(self, taskset: TaskSet | None = None) -> TaskSet:
        """Return the optimized task set (the argument is ignored once fitted)."""
        check_is_fitted(self, "solution_")
        return self.taskset_

    def fit_transform(self, taskset: TaskSet, weights: ObjectiveWeights | None = None,
                      bounds: VariableBounds | None = None) -> TaskSet:
        return self.fit(taskset, weights, bounds).taskset_

    def score(self, taskset: TaskSet | None = None, y=None) -> float:
        """Negated objective, so that greater is better (sklearn convention)."""
        check_is_fitted(self, "solution_")
        return -self.objective_
