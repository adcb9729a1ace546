"""Exact small-instance reference solver for the allocation problem.

Dynamic programming over integerized costs gives a provably optimal
one-action-per-request assignment. It exists to bound how far the
multiplier-based rule can fall below the true optimum; it is deliberately
independent of that rule and shares no selection code with it.
"""

from __future__ import annotations

import numpy as np

from .core import NO_ACTION, AllocationProblem, AllocationSummary, evaluate


class WorkLimitExceeded(ValueError):
    """The DP table would exceed the configured work limit."""


def brute_force_mckp(
    problem: AllocationProblem,
    cost_scale: int = 1,
    work_limit: int = 50_000_000,
) -> tuple[np.ndarray, AllocationSummary]:
    """Optimal assignment by dynamic programming at resolution 1/cost_scale.

    Costs are rounded to integers at ``1/cost_scale`` resolution; the DP is
    exact for the rounded instance, so pass integer-cost problems with
    ``cost_scale=1`` for a fully exact optimum. Returns the choice vector
    (``NO_ACTION`` entries allowed) and its summary under the problem's
    original real-valued costs and gains.

    Raises :class:`WorkLimitExceeded` when ``N * M * (budget * cost_scale)``
    cells would exceed ``work_limit``.
    """
    if int(cost_scale) < 1:
        raise ValueError("cost_scale must be a positive integer")
    cost_scale = int(cost_scale)
    gains = problem.gains
    n, m = gains.shape
    costs_int = np.rint(problem.actions.costs * cost_scale).astype(np.int64)
    if np.any(costs_int <= 0):
        raise ValueError("cost_scale too coarse: an action cost rounds to zero")
    budget_int = int(np.floor(problem.budget * cost_scale + 1e-9))

    work = n * m * (budget_int + 1)
    if work > work_limit:
        raise WorkLimitExceeded(
            f"DP would need {work} cells (limit {work_limit}); "
            "reduce the instance or raise work_limit"
        )

    # dp[c] = best gain using requests seen so far within capacity c.
    dp = np.zeros(budget_int + 1)
    choice = np.full((n, budget_int + 1), NO_ACTION, dtype=np.int32)
    for i in range(n):
        new = dp.copy()
        for j in range(m):
            cj = costs_int[j]
            if cj > budget_int:
                break
            cand = dp[: budget_int + 1 - cj] + gains[i, j]
            better = cand > new[cj:]
            new[cj:][better] = cand[better]
            choice[i, cj:][better] = j
        dp = new

    picks = np.full(n, NO_ACTION, dtype=np.int64)
    c = budget_int
    for i in range(n - 1, -1, -1):
        j = choice[i, c]
        picks[i] = j
        if j != NO_ACTION:
            c -= costs_int[j]
    return picks, evaluate(picks, problem)
