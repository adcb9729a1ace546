import numpy as np
import pytest

from dynalloc import ActionSpace, AllocationProblem
from dynalloc.gains import SyntheticGainParams, synthetic_rows


@pytest.fixture
def two_request_problem():
    """Hand-checkable 2-request, 2-action instance used across modules."""
    actions = ActionSpace(np.array([1.0, 2.0]))
    rows = np.array([[1.0, 1.5], [2.0, 3.0]])
    return AllocationProblem(actions, rows, 3.0)


def random_instance(seed, n=200, costs=None, sigma=1.0, alpha=0.5, budget_frac=0.5):
    """Assumption-satisfying random instance with a proportional budget."""
    costs = np.arange(10.0, 101.0, 10.0) if costs is None else np.asarray(costs, dtype=float)
    params = SyntheticGainParams(mu=0.0, sigma=sigma, alpha=alpha, seed=seed)
    rows = synthetic_rows(params, costs, n)
    actions = ActionSpace(costs)
    budget = budget_frac * n * costs[-1]
    return AllocationProblem(actions, rows, budget)
