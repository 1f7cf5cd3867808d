"""Priority-assignment policies: the discrete half of the design vector.

Each policy maps a task set to a full priority permutation (rank 0 is the
highest priority). Ties always break toward the lower task id, so repeated
runs are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .analysis import SchedOracle
from .model import ObjectiveWeights, TaskSet, apply_assignment
from .objective import InfeasiblePointError, ObjectiveFn, control_objective

__all__ = [
    "assign_rm",
    "assign_dkc",
    "brute_force_priorities",
    "PriorityPolicy",
    "BRUTE_FORCE_MAX_TASKS",
]

BRUTE_FORCE_MAX_TASKS = 9


def _ranks_from_keys(keys: list[tuple]) -> tuple[int, ...]:
    order = sorted(range(len(keys)), key=lambda i: keys[i])
    ranks = [0] * len(keys)
    for rank, idx in enumerate(order):
        ranks[idx] = rank
    return tuple(ranks)


def assign_rm(ts: TaskSet) -> tuple[int, ...]:
    """Rate-monotonic ranks: shorter period means higher priority."""
    return _ranks_from_keys([(t.period, t.id) for t in ts.tasks])


def assign_dkc(ts: TaskSet, k: float = 1.0) -> tuple[int, ...]:
    """Ranks by ascending ``deadline - k * wcet``.

    ``k = 0`` degenerates to deadline-monotonic, which equals rate-monotonic
    under implicit deadlines.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    return _ranks_from_keys([(t.deadline - k * t.wcet, t.id) for t in ts.tasks])


def brute_force_priorities(
    ts: TaskSet,
    weights: ObjectiveWeights,
    oracle: SchedOracle,
    objective: ObjectiveFn = control_objective,
) -> tuple[tuple[int, ...], float] | None:
    """Exhaustively search all priority orders for the best feasible one.

    Returns the feasible permutation with the lowest objective (ties resolved
    by lexicographic permutation order) or None when no order is schedulable.
    Guarded to small task sets; the search is factorial.
    """
    n = ts.n_tasks
    if n > BRUTE_FORCE_MAX_TASKS:
        raise ValueError(
            f"brute force limited to {BRUTE_FORCE_MAX_TASKS} tasks, got {n}"
        )
    best: tuple[tuple[int, ...], float] | None = None
    for perm in permutations(range(n)):
        candidate = apply_assignment(ts, priorities=perm)
        try:
            value = objective(candidate, weights, oracle)
        except InfeasiblePointError:
            continue
        if best is None or value < best[1]:
            best = (perm, value)
    return best


@dataclass(frozen=True)
class PriorityPolicy:
    """A named heuristic producing a permutation from the current task set."""

    kind: str  # "rm" | "dkc"
    k: float = 1.0

    def __post_init__(self):
        if self.kind not in ("rm", "dkc"):
            raise ValueError(f"unknown priority policy {self.kind!r}")

    def __call__(self, ts: TaskSet) -> tuple[int, ...]:
        if self.kind == "rm":
            return assign_rm(ts)
        return assign_dkc(ts, self.k)
