import itertools

import numpy as np
import pytest

from dynalloc import (
    NO_ACTION,
    ActionSpace,
    AllocationProblem,
    WorkLimitExceeded,
    brute_force_mckp,
    select_actions,
)
from dynalloc.core import summarize


def enumerate_optimum(problem):
    """Independent oracle: enumerate every one-hot-or-nothing assignment."""
    n, m = problem.gains.shape
    best = (0.0, None)
    for combo in itertools.product(range(-1, m), repeat=n):
        cost = sum(problem.actions.costs[j] for j in combo if j >= 0)
        if cost > problem.budget + 1e-12:
            continue
        gain = sum(problem.gains[i, j] for i, j in enumerate(combo) if j >= 0)
        if gain > best[0]:
            best = (gain, combo)
    return best[0]


class TestBruteForce:
    def test_two_request_instance(self, two_request_problem):
        picks, summary = brute_force_mckp(two_request_problem)
        # all 9 assignments enumerated by hand: optimum serves [0, 1]
        assert enumerate_optimum(two_request_problem) == 4.0
        assert summary.total_gain == 4.0
        assert summary.total_cost == 3.0
        assert picks.tolist() == [0, 1]

    def test_zero_budget_serves_nothing(self):
        actions = ActionSpace(np.array([1.0, 2.0]))
        prob = AllocationProblem(actions, np.array([[1.0, 1.5], [2.0, 3.0]]), 0.0)
        picks, summary = brute_force_mckp(prob)
        assert picks.tolist() == [NO_ACTION, NO_ACTION]
        assert summary.total_gain == 0.0

    def test_slack_budget_takes_max_gain_action(self):
        actions = ActionSpace(np.array([1.0, 2.0]))
        gains = np.array([[1.0, 1.5], [2.0, 3.0]])
        prob = AllocationProblem(actions, gains, 100.0)
        picks, summary = brute_force_mckp(prob)
        assert picks.tolist() == [1, 1]
        assert summary.total_gain == 4.5

    def test_matches_enumeration_on_random_instances(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(1, 4))
            costs = np.sort(rng.choice(np.arange(1, 9), size=m, replace=False)).astype(float)
            gains = rng.uniform(0.0, 5.0, (n, m))
            budget = float(rng.integers(0, int(n * costs[-1]) + 2))
            prob = AllocationProblem(ActionSpace(costs), gains, budget)
            _, summary = brute_force_mckp(prob)
            assert summary.total_gain == pytest.approx(enumerate_optimum(prob))
            assert summary.total_cost <= budget + 1e-9

    def test_cost_scale_refines_fractional_costs(self):
        actions = ActionSpace(np.array([0.5, 1.5]))
        gains = np.array([[1.0, 2.0], [1.0, 2.0]])
        prob = AllocationProblem(actions, gains, 2.0)
        _, coarse = brute_force_mckp(prob, cost_scale=2)
        assert coarse.total_gain == pytest.approx(3.0)  # one at 1.5, one at 0.5

    def test_work_limit_enforced(self, two_request_problem):
        with pytest.raises(WorkLimitExceeded, match="work_limit"):
            brute_force_mckp(two_request_problem, work_limit=3)

    def test_dominates_any_multiplier_assignment(self):
        # dual feasibility: the exact optimum is never below a priced rule
        rng = np.random.default_rng(22)
        for _ in range(30):
            n = int(rng.integers(2, 10))
            costs = np.sort(rng.choice(np.arange(1, 7), size=3, replace=False)).astype(float)
            v = rng.lognormal(0.0, 0.8, n)
            gains = v[:, None] * costs[None, :] ** 0.6
            budget = float(int(0.5 * n * costs[-1]))
            prob = AllocationProblem(ActionSpace(costs), gains, budget)
            _, opt = brute_force_mckp(prob)
            for lam in rng.uniform(0.0, 3.0, 5):
                ch = select_actions(gains, costs, lam)
                s = summarize(ch, gains, costs)
                if s.total_cost <= budget + 1e-9:
                    assert opt.total_gain >= s.total_gain - 1e-9
