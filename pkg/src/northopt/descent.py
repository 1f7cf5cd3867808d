"""Feasibility-preserving descent over task periods with priorities fixed.

One descent run drives the free (non-frozen) period variables downhill:
estimate a gradient by finite differences, propose a bound-clamped steepest
descent step sized by a trust radius, then backtrack the step until it is
both schedulable and strictly decreasing. Every accepted iterate is feasible;
rejected trials carry their miss information out of the loop so variable
elimination can act on it.

The step proposal is deliberately first order: the objective is piecewise
constant in the response times (ceiling breakpoints), so curvature estimates
are unreliable, and the accept test uses the true objective decrease anyway.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .analysis import AnalysisVerdict
from .model import TaskSet, VariableBounds, apply_assignment
from .objective import InfeasiblePointError, ProblemSpec

__all__ = [
    "DescentConfig",
    "StepProposal",
    "OptState",
    "BacktrackResult",
    "RejectedTrial",
    "DescentResult",
    "numeric_gradient",
    "propose_step",
    "feasibility_backtrack",
    "run_descent",
]

# Minimum decrease for accepting a step; guards against looping on plateaus.
ACCEPT_EPS = 1e-9
_STATIONARY_EPS = 1e-12


@dataclass(frozen=True)
class DescentConfig:
    """Tuning knobs of one descent run.

    ``scaled_to`` derives the length-scale parameters from the period upper
    bounds, which is the only scale the problem offers.
    """

    step_threshold: float
    fd_step: float
    initial_trust_radius: float
    backtrack_factor: float = 0.5
    max_backtracks: int = 30
    max_iterations: int = 500

    def __post_init__(self):
        if min(self.step_threshold, self.fd_step, self.initial_trust_radius) <= 0:
            raise ValueError("descent length scales must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.max_backtracks < 0 or self.max_iterations < 1:
            raise ValueError("iteration limits must be positive")

    @classmethod
    def scaled_to(cls, bounds: VariableBounds, **overrides) -> "DescentConfig":
        # fd_step is deliberately tiny relative to the box: the smooth part
        # of the objective is linear in the periods (exact at any h), while a
        # probe window that straddles a response-time breakpoint injects a
        # spike of order beta*C/(2h) that hijacks the whole descent
        # direction. Small windows make that event rare.
        scale = float(np.mean(bounds.upper))
        params = {
            "step_threshold": 1e-2 * scale,
            "fd_step": 1e-5 * scale,
            "initial_trust_radius": 0.1 * scale,
        }
        params.update(overrides)
        return cls(**params)


@dataclass(frozen=True)
class StepProposal:
    """A candidate move of the free period variables."""

    delta: np.ndarray
    predicted_decrease: float


@dataclass(frozen=True)
class OptState:
    """The optimizer's iterate: a feasible task set plus bookkeeping.

    ``frozen`` holds ids of eliminated period variables; they stay constant
    for the rest of the run.
    """

    taskset: TaskSet
    objective_value: float
    frozen: frozenset[int] = frozenset()
    outer_iter: int = 0
    inner_iter: int = 0

    def free_ids(self) -> list[int]:
        return [t.id for t in self.taskset.tasks if t.id not in self.frozen]


@dataclass(frozen=True)
class BacktrackResult:
    accepted: bool
    delta: np.ndarray | None
    taskset: TaskSet | None
    objective_value: float | None
    backtracks: int
    last_verdict: AnalysisVerdict | None


@dataclass(frozen=True)
class RejectedTrial:
    """The most recent infeasible trial, kept for variable elimination."""

    delta: np.ndarray
    free_ids: tuple[int, ...]
    verdict: AnalysisVerdict | None


@dataclass(frozen=True)
class DescentResult:
    state: OptState
    status: str  # converged | stationary | max_iterations
    last_rejected: RejectedTrial | None
    n_iterations: int
    n_accepted: int


def make_free_objective(problem: ProblemSpec, taskset: TaskSet,
                        free_ids: Sequence[int]) -> Callable[[np.ndarray], float]:
    """Objective as a function of the free periods only.

    Probe periods are clipped into the variable bounds so finite-difference
    probes can never step outside the box.
    """
    base = taskset.periods
    free = list(free_ids)
    lower = problem.bounds.lower
    upper = problem.bounds.upper

    def f(x: np.ndarray) -> float:
        periods = base.copy()
        periods[free] = x
        np.clip(periods, lower, upper, out=periods)
        return problem.evaluate(apply_assignment(taskset, periods=periods))

    return f


def numeric_gradient(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    h: float,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
    f_x: float | None = None,
) -> np.ndarray:
    """Central finite differences, degrading to one-sided at box boundaries.

    A probe that lands on an infeasible point is dropped and the difference
    becomes one-sided toward the interior; if both probes of a coordinate are
    infeasible its entry is 0 (no usable local information).
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    fx_cache = f_x

    for k in range(x.size):
        up = h if upper is None else min(h, upper[k] - x[k])
        dn = h if lower is None else min(h, x[k] - lower[k])
        up = max(up, 0.0)
        dn = max(dn, 0.0)

        f_up = f_dn = None
        if up > 0:
            probe = x.copy()
            probe[k] += up
            try:
                f_up = f(probe)
            except InfeasiblePointError:
                f_up = None
        if dn > 0:
            probe = x.copy()
            probe[k] -= dn
            try:
                f_dn = f(probe)
            except InfeasiblePointError:
                f_dn = None

        if f_up is not None and f_dn is not None:
            g[k] = (f_up - f_dn) / (up + dn)
        elif f_up is not None:
            if fx_cache is None:
                fx_cache = f(x)
            g[k] = (f_up - fx_cache) / up
        elif f_dn is not None:
            if fx_cache is None:
                fx_cache = f(x)
            g[k] = (fx_cache - f_dn) / dn
        else:
            g[k] = 0.0
    return g


def robust_gradient(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    h: float,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
    f_x: float | None = None,
) -> np.ndarray:
    """Finite differences that shrug off breakpoint spikes.

    Uses the same probes as central differences but forms both one-sided
    slopes and keeps the smaller in magnitude. Where the objective is
    locally smooth (here: linear between response-time breakpoints) the two
    sides agree and this equals the central difference; where a jump sits
    inside one half-window, the clean side wins instead of the spike
    contaminating the whole direction.
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    if f_x is None:
        f_x = f(x)

    for k in range(x.size):
        up = h if upper is None else min(h, upper[k] - x[k])
        dn = h if lower is None else min(h, x[k] - lower[k])
        slopes = []
        if up > 0:
            probe = x.copy()
            probe[k] += up
            try:
                slopes.append((f(probe) - f_x) / up)
            except InfeasiblePointError:
                pass
        if dn > 0:
            probe = x.copy()
            probe[k] -= dn
            try:
                slopes.append((f_x - f(probe)) / dn)
            except InfeasiblePointError:
                pass
        if slopes:
            g[k] = min(slopes, key=abs)
    return g


def propose_step(
    x: np.ndarray,
    gradient: np.ndarray,
    trust_radius: float,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
    scaling: np.ndarray | None = None,
) -> StepProposal:
    """Descent step of length ``trust_radius``, clamped to bounds.

    With ``scaling`` (a positive diagonal metric) the direction is the scaled
    gradient ``-g/scaling``, still a strict descent direction for the local
    model; without it this is plain steepest descent.
    """
    if trust_radius <= 0:
        raise ValueError("trust radius must be positive")
    x = np.asarray(x, dtype=float)
    g = np.asarray(gradient, dtype=float)
    direction = g if scaling is None else g / scaling
    norm = float(np.linalg.norm(direction))
    if norm < _STATIONARY_EPS:
        return StepProposal(np.zeros_like(x), 0.0)
    delta = -trust_radius * direction / norm
    target = x + delta
    if lower is not None:
        target = np.maximum(target, lower)
    if upper is not None:
        target = np.minimum(target, upper)
    delta = target - x
    predicted = max(float(-(g @ delta)), 0.0)
    return StepProposal(delta, predicted)


def feasibility_backtrack(
    state: OptState,
    delta: np.ndarray,
    problem: ProblemSpec,
    cfg: DescentConfig,
) -> BacktrackResult:
    """Shrink ``delta`` geometrically until the trial point is acceptable.

    Acceptable means: schedulable and strictly below the current objective.
    Rejection (nothing acceptable within the backtrack budget) is a normal
    outcome; the last infeasible trial's verdict rides along for variable
    elimination.
    """
    delta = np.asarray(delta, dtype=float)
    free = state.free_ids()
    if delta.shape != (len(free),):
        raise ValueError(f"delta must have one entry per free variable ({len(free)})")

    if not np.any(delta):
        return BacktrackResult(False, None, None, None, 0, None)

    base = state.taskset.periods
    lower = problem.bounds.lower
    upper = problem.bounds.upper
    last_verdict: AnalysisVerdict | None = None
    best: BacktrackResult | None = None

    scale = 1.0
    for k in range(cfg.max_backtracks + 1):
        periods = base.copy()
        periods[free] += delta * scale
        np.clip(periods, lower, upper, out=periods)
        trial = apply_assignment(state.taskset, periods=periods)
        try:
            value = problem.evaluate(trial)
            if value < state.objective_value - ACCEPT_EPS:
                if best is None or value < best.objective_value:
                    # Keep shrinking while the shorter step is even better
                    # (it may dodge a response-time jump the long one pays).
                    best = BacktrackResult(True, delta * scale, trial, value,
                                           k, last_verdict)
                else:
                    break
            elif best is not None:
                break
        except InfeasiblePointError as exc:
            last_verdict = exc.verdict
            if best is not None:
                break
        scale *= cfg.backtrack_factor
    if best is not None:
        return best
    return BacktrackResult(False, None, None, None, cfg.max_backtracks, last_verdict)


def run_descent(
    state: OptState,
    problem: ProblemSpec,
    cfg: DescentConfig,
    on_accept: Callable[[OptState], None] | None = None,
) -> DescentResult:
    """Descend the free periods until the proposed step collapses.

    Every accepted iterate is feasible and strictly decreases the objective.

    The direction is the spike-robust gradient under a diagonal metric of
    per-coordinate marginal costs, measured by a second gradient whose probe
    spans half the trust radius. In the smooth region both gradients equal
    the linear slope, so the direction makes equal progress per coordinate
    in objective units; as a coordinate's step-scale cost grows (response
    times reacting to its shrinking period), its share of the step shrinks
    in proportion. The trust radius tracks what backtracking actually
    achieved (grows after accepts, shrinks after rejections); a rejection
    also anneals the probe step. The run ends when the proposed step is
    shorter than ``step_threshold`` (converged), when it is exactly zero
    (stationary: zero gradient, or pinned at the bounds), or at the
    iteration cap.
    """
    free = state.free_ids()
    if not free:
        return DescentResult(state, "stationary", None, 0, 0)

    verdict = problem.oracle(state.taskset)
    if not verdict.schedulable:
        raise ValueError("descent requires a feasible starting point")

    lower = problem.bounds.lower[free]
    upper = problem.bounds.upper[free]
    f = make_free_objective(problem, state.taskset, free)
    x = state.taskset.periods[free]

    radius = cfg.initial_trust_radius
    fd_step = cfg.fd_step
    last_rejected: RejectedTrial | None = None
    status = "max_iterations"
    iterations = 0
    accepted = 0

    for _ in range(cfg.max_iterations):
        iterations += 1
        gradient = robust_gradient(f, x, fd_step, lower, upper,
                                   f_x=state.objective_value)
        cost_probe = 0.5 * radius
        if cost_probe > fd_step:
            cost = np.abs(robust_gradient(f, x, cost_probe, lower, upper,
                                          f_x=state.objective_value))
        else:
            cost = np.abs(gradient)
        if cost.max() > 0:
            scaling = np.maximum(cost, 1e-8 * cost.max())
        else:
            scaling = np.ones_like(gradient)
        proposal = propose_step(x, gradient, radius, lower, upper, scaling)
        norm = float(np.linalg.norm(proposal.delta))
        if norm < _STATIONARY_EPS:
            status = "stationary"
            break
        if norm < cfg.step_threshold:
            status = "converged"
            break

        result = feasibility_backtrack(state, proposal.delta, problem, cfg)
        if result.last_verdict is not None:
            last_rejected = RejectedTrial(proposal.delta.copy(), tuple(free),
                                          result.last_verdict)
        if result.accepted:
            accepted += 1
            state = replace(
                state,
                taskset=result.taskset,
                objective_value=result.objective_value,
                inner_iter=state.inner_iter + 1,
            )
            if on_accept is not None:
                on_accept(state)
            x = state.taskset.periods[free]
            f = make_free_objective(problem, state.taskset, free)
            fd_step = cfg.fd_step
            # Track the step size backtracking actually achieved, but never
            # shrink by more than one factor per iteration: a single deeply
            # backtracked accept must not collapse the whole trust region.
            target = float(np.linalg.norm(result.delta)) / cfg.backtrack_factor
            radius = min(max(target, radius * cfg.backtrack_factor),
                         cfg.initial_trust_radius)
        else:
            radius *= cfg.backtrack_factor
            fd_step *= cfg.backtrack_factor

    return DescentResult(state, status, last_rejected, iterations, accepted)
