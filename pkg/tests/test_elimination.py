import numpy as np
import pytest

from northopt import (
    OptState,
    analyze,
    apply_assignment,
    as_boolean_blackbox,
    eliminate_missing,
    make_problem,
    make_taskset,
    reformulate,
    subspace_search,
)
from northopt.objective import ProblemSpec


def blocked_instance():
    """Start T=(10,10,12); the step (-2,-2,-7) is blocked only by task 2.

    At T=(8,8,5) task 2 misses (its response is 6); zeroing the third
    coordinate gives the schedulable, objective-decreasing T=(8,8,12).
    Verified against the response-time oracle in test_construction below.
    """
    ts = make_taskset([1, 1, 4], [10, 10, 12])
    prob = make_problem(ts)
    state = OptState(ts, prob.evaluate(ts))
    delta = np.array([-2.0, -2.0, -7.0])
    return ts, prob, state, delta


def test_construction():
    ts, prob, state, delta = blocked_instance()
    assert analyze(ts).schedulable
    full = apply_assignment(ts, periods=[8, 8, 5])
    v = analyze(full)
    assert not v.schedulable and v.miss_set == frozenset({2})
    zeroed = apply_assignment(ts, periods=[8, 8, 12])
    assert analyze(zeroed).schedulable
    assert prob.evaluate(zeroed) < state.objective_value


class TestSubspaceSearch:
    def test_zeroing_blocked_coordinate_found(self):
        ts, prob, state, delta = blocked_instance()
        out = subspace_search(state, delta, prob, budget=6)
        assert out.kind == "found_direction"
        assert out.direction == pytest.approx([-2.0, -2.0, 0.0])

    def test_fresh_oracle_confirms_direction(self):
        ts, prob, state, delta = blocked_instance()
        out = subspace_search(state, delta, prob, budget=6)
        moved = apply_assignment(ts, periods=ts.periods + out.direction)
        assert analyze(moved).schedulable

    def test_zero_delta_exhausted(self):
        _, prob, state, _ = blocked_instance()
        out = subspace_search(state, np.zeros(3), prob, budget=6)
        assert out.kind == "exhausted"

    def test_zero_budget_exhausted_without_oracle_calls(self):
        ts, prob, state, delta = blocked_instance()
        calls = []

        class Spy:
            provides_details = True

            def __call__(self, t):
                calls.append(t)
                return analyze(t)

        spied = ProblemSpec(prob.weights, prob.bounds, Spy(), prob.objective)
        out = subspace_search(state, delta, spied, budget=0)
        assert out.kind == "exhausted"
        assert calls == []

    def test_budget_caps_oracle_calls(self):
        ts, prob, state, delta = blocked_instance()
        calls = []

        class Spy:
            provides_details = True

            def __call__(self, t):
                calls.append(t)
                return analyze(t)

        spied = ProblemSpec(prob.weights, prob.bounds, Spy(), prob.objective)
        subspace_search(state, delta, spied, budget=1)
        assert len(calls) <= 1

    def test_miss_guided_candidate(self):
        # single zeroings all fail, but zeroing the whole miss set works
        ts = make_taskset([1, 1, 4, 4], [10, 10, 12, 14])
        prob = make_problem(ts)
        state = OptState(ts, prob.evaluate(ts))
        delta = np.array([-1.5, -1.5, -7.0, -8.5])
        full = apply_assignment(ts, periods=ts.periods + delta)
        v = analyze(full)
        assert not v.schedulable and v.miss_set == frozenset({2, 3})
        out = subspace_search(state, delta, prob, budget=10, miss_ids=v.miss_set)
        assert out.kind == "found_direction"
        assert out.direction == pytest.approx([-1.5, -1.5, 0.0, 0.0])


class TestEliminateMissing:
    def test_detailed_verdict_freezes_miss_set(self):
        ts, prob, state, delta = blocked_instance()
        verdict = analyze(apply_assignment(ts, periods=[8, 8, 5]))
        out = eliminate_missing(state, verdict, prob, delta)
        assert out.kind == "eliminated"
        assert out.newly_frozen == frozenset({2})

    def test_already_frozen_miss_is_exhausted(self):
        ts, prob, state, delta = blocked_instance()
        state = OptState(ts, state.objective_value, frozen=frozenset({2}))
        verdict = analyze(apply_assignment(ts, periods=[8, 8, 5]))
        out = eliminate_missing(state, verdict, prob, np.array([-2.0, -2.0]))
        assert out.kind == "exhausted"

    def test_boolean_oracle_blames_by_solo_probes(self):
        ts, prob, state, delta = blocked_instance()
        boolean = ProblemSpec(prob.weights, prob.bounds,
                              as_boolean_blackbox(prob.oracle), prob.objective)
        verdict = boolean.oracle(apply_assignment(ts, periods=[8, 8, 5]))
        assert verdict.miss_set is None
        out = eliminate_missing(state, verdict, boolean, delta)
        assert out.kind == "eliminated"
        assert out.newly_frozen == frozenset({2})

    def test_boolean_oracle_tie_break_largest_step(self):
        # all solo probes feasible: blame falls on the largest step
        ts = make_taskset([2, 2], [10, 10])
        prob = make_problem(ts)
        boolean = ProblemSpec(prob.weights, prob.bounds,
                              as_boolean_blackbox(prob.oracle), prob.objective)
        state = OptState(ts, 28.0)
        out = eliminate_missing(state, None, boolean, np.array([-1.0, -3.0]))
        assert out.kind == "eliminated"
        assert out.newly_frozen == frozenset({1})

    def test_all_zero_delta_exhausted(self):
        ts = make_taskset([2, 2], [10, 10])
        prob = make_problem(ts)
        state = OptState(ts, 28.0)
        assert eliminate_missing(state, None, prob, np.zeros(2)).kind == "exhausted"


class TestReformulate:
    def test_found_direction_moves_the_point(self):
        ts, prob, state, delta = blocked_instance()
        out = subspace_search(state, delta, prob, budget=6)
        after = reformulate(state, out, prob)
        assert after.taskset.periods == pytest.approx([8.0, 8.0, 12.0])
        assert after.objective_value < state.objective_value
        assert after.frozen == state.frozen

    def test_eliminated_grows_frozen_set_only(self):
        ts, prob, state, delta = blocked_instance()
        verdict = analyze(apply_assignment(ts, periods=[8, 8, 5]))
        out = eliminate_missing(state, verdict, prob, delta)
        after = reformulate(state, out, prob)
        assert after.frozen == frozenset({2})
        assert after.taskset == state.taskset
        assert after.free_ids() == [0, 1]

    def test_exhausted_is_an_error(self):
        ts, prob, state, _ = blocked_instance()
        from northopt import VeOutcome
        with pytest.raises(ValueError):
            reformulate(state, VeOutcome.exhausted(), prob)

    def test_frozen_monotone_across_rounds(self):
        ts, prob, state, delta = blocked_instance()
        verdict = analyze(apply_assignment(ts, periods=[8, 8, 5]))
        s1 = reformulate(state, eliminate_missing(state, verdict, prob, delta), prob)
        assert state.frozen <= s1.frozen
        # freezing everything leaves no free variables and stops the loop
        s2 = OptState(s1.taskset, s1.objective_value,
                      frozen=frozenset({0, 1, 2}))
        assert s2.free_ids() == []
