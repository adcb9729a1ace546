"""Core allocation model: action spaces, gain rows, and the per-request rule.

A request pool is an ``(N, M)`` gain matrix: row ``i`` holds the expected
gain of request ``i`` under each of the ``M`` actions, whose costs are a
strictly increasing vector ``q``. Given a multiplier ``lam`` (the shadow
price of one unit of computation), each request independently takes the
action maximizing ``gain - lam * cost``, provided that net gain is strictly
positive and the action's cost does not exceed an optional ``max_power``
cap. Requests with no qualifying action are skipped (``NO_ACTION``).

Serving an action whose net gain is exactly zero is dual-indifferent
(it changes the relaxed objective by nothing while consuming budget), so
the rule here declines it; this also makes the multiplier's upper bound
``max(gain/cost)`` an exact no-serve point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import (
    as_float_array,
    check_costs,
    check_gain_matrix,
    check_gain_row,
    check_nonneg,
)

#: Sentinel choice value for "serve nothing".
NO_ACTION = -1


@dataclass(frozen=True)
class ActionSpace:
    """The discrete computation levels available per request.

    ``costs`` are strictly increasing positive evaluation quotas (e.g.
    number of candidates scored), so index order equals cost order.
    """

    costs: np.ndarray

    def __post_init__(self):
        arr = check_costs(self.costs)
        arr.setflags(write=False)
        object.__setattr__(self, "costs", arr)

    @property
    def n_actions(self) -> int:
        return int(self.costs.shape[0])

    def max_affordable(self, cap: float) -> int:
        """Largest action index with cost <= cap, or NO_ACTION if none."""
        idx = int(np.searchsorted(self.costs, cap, side="right")) - 1
        return idx if idx >= 0 else NO_ACTION


@dataclass(frozen=True)
class AllocationProblem:
    """A request pool, an action space, and a shared computation budget."""

    actions: ActionSpace
    gains: np.ndarray
    budget: float

    def __post_init__(self):
        gains = check_gain_matrix(self.gains, self.actions.n_actions)
        if gains.shape[0] < 1:
            raise ValueError("problem must contain at least one request")
        gains.setflags(write=False)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "budget", check_nonneg(self.budget, "budget"))

    @property
    def n_requests(self) -> int:
        return int(self.gains.shape[0])


@dataclass(frozen=True)
class AllocationSummary:
    """Objective and constraint totals of an assignment."""

    total_gain: float
    total_cost: float
    served_count: int


@dataclass
class AssumptionReport:
    """Pointwise violations of the two structural gain assumptions.

    ``gain_violations`` lists (row, action) pairs where the gain decreases
    from the previous (cheaper) action; ``ratio_violations`` lists pairs
    where gain/cost increases from the previous action. An empty report
    means gains are non-decreasing and gain-per-cost is non-increasing in
    the action index for every row.
    """

    gain_violations: list[tuple[int, int]] = field(default_factory=list)
    ratio_violations: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.gain_violations and not self.ratio_violations

    def __str__(self) -> str:
        if self.ok:
            return "assumptions hold"
        return (
            f"{len(self.gain_violations)} gain monotonicity violation(s), "
            f"{len(self.ratio_violations)} diminishing-returns violation(s)"
        )


def _costs_of(actions) -> np.ndarray:
    if isinstance(actions, ActionSpace):
        return actions.costs
    return check_costs(actions)


def select_action(gains, actions, lam: float, max_power: float | None = None) -> int | None:
    """Pick the best action for one request at multiplier ``lam``.

    Returns the index maximizing ``gain - lam * cost`` among actions with
    strictly positive net gain (and cost <= ``max_power`` when given), or
    ``None`` when no action qualifies. Ties go to the cheapest action.
    """
    costs = _costs_of(actions)
    row = check_gain_row(gains, costs.shape[0])
    lam = check_nonneg(lam, "lam")
    choice = select_actions(row[None, :], costs, lam, max_power=max_power)[0]
    return None if choice == NO_ACTION else int(choice)


def select_actions(
    gains,
    actions,
    lam: float,
    max_power: float | None = None,
    floor_action: bool = False,
) -> np.ndarray:
    """Vectorized per-request action choice over an ``(N, M)`` gain matrix.

    Returns an int array of choices with ``NO_ACTION`` (-1) for skipped
    requests. With ``floor_action=True`` skipped requests are served the
    cheapest action instead (for deployments where dropping a request is
    unacceptable); the cap still wins, so a ``max_power`` below every cost
    serves nothing even with the floor.
    """
    costs = _costs_of(actions)
    gm = check_gain_matrix(gains, costs.shape[0])
    lam = check_nonneg(lam, "lam")
    nets = gm - lam * costs[None, :]
    if max_power is not None:
        allowed = costs <= max_power
        if not allowed.any():
            return np.full(gm.shape[0], NO_ACTION, dtype=np.int64)
        nets = np.where(allowed[None, :], nets, -np.inf)
    best_j = np.argmax(nets, axis=1)
    best_net = nets[np.arange(gm.shape[0]), best_j]
    choices = np.where(best_net > 0.0, best_j, NO_ACTION).astype(np.int64)
    if floor_action:
        # costs are ascending, so the cheapest allowed action is index 0
        choices = np.where(choices == NO_ACTION, 0, choices)
    return choices


def dual_mu(gains, actions, lam: float) -> float:
    """Per-request dual value: ``max(0, max_j(gain_j - lam * cost_j))``.

    The clamp at zero encodes the option of serving nothing.
    """
    costs = _costs_of(actions)
    row = check_gain_row(gains, costs.shape[0])
    lam = check_nonneg(lam, "lam")
    return float(max(0.0, np.max(row - lam * costs)))


def dual_values(gains, actions, lam: float) -> np.ndarray:
    """Vectorized :func:`dual_mu` over an ``(N, M)`` gain matrix."""
    costs = _costs_of(actions)
    gm = check_gain_matrix(gains, costs.shape[0])
    lam = check_nonneg(lam, "lam")
    return np.maximum(0.0, (gm - lam * costs[None, :]).max(axis=1))


def evaluate(choices, problem: AllocationProblem) -> AllocationSummary:
    """Total gain, total cost, and served count of an assignment.

    ``choices`` is one entry per request: an action index or ``NO_ACTION``,
    which contributes zero to both totals.
    """
    arr = np.asarray(choices)
    if arr.ndim != 1 or arr.shape[0] != problem.n_requests:
        raise ValueError(
            f"choices must have one entry per request "
            f"({problem.n_requests}), got shape {arr.shape}"
        )
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < NO_ACTION or arr.max() >= problem.actions.n_actions):
        raise ValueError("choices contain an out-of-range action index")
    return summarize(arr, problem.gains, problem.actions.costs)


def summarize(choices: np.ndarray, gains: np.ndarray, costs: np.ndarray) -> AllocationSummary:
    """Like :func:`evaluate` but over raw arrays, without re-validation."""
    mask = choices >= 0
    idx = np.flatnonzero(mask)
    total_gain = float(gains[idx, choices[idx]].sum())
    total_cost = float(costs[choices[idx]].sum())
    return AllocationSummary(total_gain, total_cost, int(mask.sum()))


def verify_assumptions(gains, actions) -> AssumptionReport:
    """Check gain monotonicity and diminishing gain-per-cost, row by row.

    Reports every (row, action) position where the gain strictly decreases
    versus the previous action, or where gain/cost strictly increases
    versus the previous action. Comparisons are exact.
    """
    costs = _costs_of(actions)
    gm = check_gain_matrix(gains, costs.shape[0])
    report = AssumptionReport()
    if gm.shape[1] < 2:
        return report
    gain_bad = gm[:, 1:] < gm[:, :-1]
    ratios = gm / costs[None, :]
    ratio_bad = ratios[:, 1:] > ratios[:, :-1]
    for i, j in zip(*np.nonzero(gain_bad)):
        report.gain_violations.append((int(i), int(j) + 1))
    for i, j in zip(*np.nonzero(ratio_bad)):
        report.ratio_violations.append((int(i), int(j) + 1))
    return report
