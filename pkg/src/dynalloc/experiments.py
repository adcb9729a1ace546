"""Offline experiment helpers: matched-cost/matched-gain comparisons of the
priced rule against a uniform fixed-action policy, plus per-action
aggregates of an allocation."""

from __future__ import annotations

import numpy as np

from .core import ActionSpace, AllocationProblem, AllocationSummary, select_actions, summarize
from .solver import SolverConfig, solve_lambda
from .validation import check_costs


def fixed_action_totals(rows, costs, action: int) -> tuple[float, float]:
    """Pool gain and cost if every request takes the same action."""
    costs = check_costs(costs)
    rows = np.asarray(rows, dtype=float)
    if not (0 <= action < costs.shape[0]):
        raise ValueError(f"action index {action} out of range")
    return float(rows[:, action].sum()), float(rows.shape[0] * costs[action])


def baseline_action_curve(rows, costs) -> list[tuple[int, float, float]]:
    """(action, total gain, total cost) of the uniform policy for every action."""
    costs = check_costs(costs)
    return [
        (j, *fixed_action_totals(rows, costs, j)) for j in range(costs.shape[0])
    ]


def gain_at_matched_cost(rows, costs, budget: float) -> AllocationSummary:
    """Totals of the priced rule solved to spend at most ``budget``.

    Uses a near-zero cost tolerance so the result lands at or under the
    reference spend rather than within the solver's default 0.1% band.
    """
    problem = AllocationProblem(ActionSpace(np.asarray(costs, dtype=float)), rows, budget)
    config = SolverConfig(epsilon=max(budget, 1.0) * 1e-9)
    result = solve_lambda(problem, config, on_violation="skip")
    choices = select_actions(problem.gains, problem.actions.costs, result.lambda_star)
    return summarize(choices, problem.gains, problem.actions.costs)


def cost_at_matched_gain(
    rows, costs, target_gain: float, iterations: int = 64
) -> AllocationSummary:
    """Cheapest priced-rule totals whose gain still reaches ``target_gain``.

    Bisects the multiplier on the (non-increasing) gain curve: the largest
    multiplier whose pool gain is at least the target yields the least
    spend among qualifying allocations.
    """
    costs = check_costs(costs)
    rows = np.asarray(rows, dtype=float)
    ratios = rows / costs[None, :]
    lo, hi = 0.0, float(ratios.max()) * (1 + 1e-12)

    def totals(lam):
        return summarize(select_actions(rows, costs, lam), rows, costs)

    if totals(lo).total_gain < target_gain:
        # Even the unconstrained rule cannot reach the target.
        return totals(lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if totals(mid).total_gain >= target_gain:
            lo = mid
        else:
            hi = mid
    return totals(lo)


def shuffled_allocation(choices, seed) -> np.ndarray:
    """Permute an assignment across requests: identical action multiset
    (hence identical total cost), value targeting destroyed."""
    arr = np.asarray(choices, dtype=np.int64)
    rng = np.random.default_rng(seed)
    return arr[rng.permutation(arr.shape[0])]


def per_action_totals(rows, costs, choices) -> list[tuple[int, int, float, float]]:
    """Aggregate an allocation by chosen action.

    Returns (action, request count, summed gain, summed cost) for every
    action that served at least one request, in action order.
    """
    costs = check_costs(costs)
    rows = np.asarray(rows, dtype=float)
    arr = np.asarray(choices, dtype=np.int64)
    out = []
    for j in range(costs.shape[0]):
        mask = arr == j
        n = int(mask.sum())
        if n == 0:
            continue
        out.append((j, n, float(rows[mask, j].sum()), float(n * costs[j])))
    return out
