"""Estimator-style front end for the allocation core.

``fit`` solves the budget-clearing multiplier on a pool of gain rows;
``predict`` maps gain rows to per-request action choices at that
multiplier. The class follows scikit-learn conventions (constructor stores
parameters verbatim, fitted attributes carry a trailing underscore,
``get_params``/``set_params`` inherited), so it composes with pipelines
and parameter search out of the box.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .core import ActionSpace, AllocationProblem, select_actions, summarize
from .solver import SolverConfig, solve_lambda


class ComputationAllocator(BaseEstimator):
    """Per-request computation allocator.

    Parameters
    ----------
    action_costs:
        Strictly increasing positive costs, one per action.
    budget:
        Total cost the fitted pool may spend.
    epsilon:
        Bisection cost tolerance; ``None`` means 0.1% of the budget.
    max_iterations:
        Bisection iteration cap.
    check_assumptions:
        ``"warn"``, ``"error"``, or ``"skip"`` for the structural precheck.
    floor_action:
        Serve the cheapest action instead of skipping a request.
    """

    def __init__(
        self,
        action_costs=(1.0,),
        budget: float = 0.0,
        epsilon: float | None = None,
        max_iterations: int = 64,
        check_assumptions: str = "warn",
        floor_action: bool = False,
    ):
        self.action_costs = action_costs
        self.budget = budget
        self.epsilon = epsilon
        self.max_iterations = max_iterations
        self.check_assumptions = check_assumptions
        self.floor_action = floor_action

    def fit(self, X, y=None):
        """Solve the multiplier on the pool ``X`` of shape (N, M)."""
        actions = ActionSpace(np.asarray(self.action_costs, dtype=float))
        problem = AllocationProblem(actions, X, self.budget)
        config = SolverConfig(epsilon=self.epsilon, max_iterations=self.max_iterations)
        result = solve_lambda(problem, config, on_violation=self.check_assumptions)
        self.action_space_ = actions
        self.result_ = result
        self.lambda_ = result.lambda_star
        self.converged_ = result.converged
        self.achieved_cost_ = result.achieved_cost
        return self

    def _require_fitted(self):
        if not hasattr(self, "lambda_"):
            raise ValueError("allocator is not fitted")

    def predict(self, X, max_power: float | None = None) -> np.ndarray:
        """Action choices for gain rows ``X`` (``-1`` = serve nothing)."""
        self._require_fitted()
        return select_actions(
            X,
            self.action_space_.costs,
            self.lambda_,
            max_power=max_power,
            floor_action=self.floor_action,
        )

    def score(self, X, y=None) -> float:
        """Total gain the fitted multiplier extracts from ``X``."""
        self._require_fitted()
        choices = self.predict(X)
        gains = np.asarray(X, dtype=float)
        return summarize(choices, gains, self.action_space_.costs).total_gain
