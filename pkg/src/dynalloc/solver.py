"""Bisection search for the budget-clearing multiplier over a request pool.

The aggregate cost of the per-request rule is non-increasing in the
multiplier, so the value at which the pool spends exactly its budget can
be bracketed and bisected. Because the cost curve is piecewise constant,
an exact hit may be impossible: the search returns the evaluated midpoint
minimizing the cost gap among those not exceeding ``budget + epsilon``
(never over capacity), with ``converged`` set only when the gap is within
``epsilon``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (
    AllocationProblem,
    select_actions,
    summarize,
    verify_assumptions,
)
from .validation import check_nonneg, check_positive

# Relative headroom added to the interval's upper end so that, after
# floating-point rounding of gain/cost ratios, no action retains a
# positive net gain there and the zero-cost end is exact.
_UPPER_MARGIN = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Bisection tolerances. ``epsilon=None`` means 0.1% of the budget."""

    epsilon: float | None = None
    max_iterations: int = 64
    interval: tuple[float, float] | None = None

    def __post_init__(self):
        if self.epsilon is not None:
            check_positive(self.epsilon, "epsilon")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.interval is not None:
            lo, hi = self.interval
            if not (0 <= lo < hi):
                raise ValueError("interval must satisfy 0 <= lo < hi")

    def resolve_epsilon(self, budget: float) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return max(1e-3 * budget, 1e-12)


@dataclass
class SolverResult:
    """Outcome of the multiplier search."""

    lambda_star: float
    achieved_cost: float
    gap: float
    iterations: int
    converged: bool
    trace: list[tuple[float, float]] = field(default_factory=list)
    note: str = ""


@dataclass(frozen=True)
class SweepPoint:
    """Pool totals of the per-request rule at one multiplier value."""

    lam: float
    total_gain: float
    total_cost: float
    served_count: int


def default_interval(problem: AllocationProblem) -> tuple[float, float]:
    """Bracketing interval ``(0, max(gain/cost))`` for the bisection.

    At the upper end no action keeps a positive net gain, so the pool
    spends nothing there and any budget below the zero-multiplier spend is
    bracketed. (The upper end carries a relative margin of 1e-12 to absorb
    rounding in the ratio computation.) Degenerate all-zero-gain pools
    return ``(0, 0)``.
    """
    ratios = problem.gains / problem.actions.costs[None, :]
    hi = float(ratios.max())
    return 0.0, hi * (1.0 + _UPPER_MARGIN)


def adjust_budget(budget: float, qps_regular: float, qps_current: float) -> float:
    """Scale a budget by regular/current traffic so a fixed-size pool keeps
    the live system within its per-interval constraint."""
    check_nonneg(budget, "budget")
    check_positive(qps_regular, "qps_regular")
    if qps_current <= 0:
        raise ValueError(f"qps_current must be positive, got {qps_current}")
    return budget * qps_regular / qps_current


def _pool_totals(problem: AllocationProblem, lam: float):
    choices = select_actions(problem.gains, problem.actions.costs, lam)
    return summarize(choices, problem.gains, problem.actions.costs)


def solve_lambda(
    problem: AllocationProblem,
    config: SolverConfig | None = None,
    on_violation: str = "warn",
) -> SolverResult:
    """Find the multiplier whose pool spend best matches the budget.

    ``on_violation`` controls the structural-assumption precheck:
    ``"warn"`` (default), ``"error"``, or ``"skip"``. The search itself is
    deterministic and never returns a spend above ``budget + epsilon``;
    when the cost curve cannot reach the budget within tolerance the best
    under-budget multiplier is returned with ``converged=False``.
    """
    config = config or SolverConfig()
    if on_violation not in ("warn", "error", "skip"):
        raise ValueError("on_violation must be 'warn', 'error', or 'skip'")
    if on_violation != "skip":
        report = verify_assumptions(problem.gains, problem.actions.costs)
        if not report.ok:
            if on_violation == "error":
                raise ValueError(f"gain structure violates assumptions: {report}")
            warnings.warn(
                f"gain structure violates assumptions ({report}); "
                "bisection proceeds best-effort",
                stacklevel=2,
            )

    budget = problem.budget
    eps = config.resolve_epsilon(budget)
    lo, hi = config.interval if config.interval is not None else default_interval(problem)

    # Budget at or below zero spend: the whole pool is unaffordable.
    if budget <= 0:
        s = _pool_totals(problem, hi)
        gap = abs(s.total_cost - budget)
        return SolverResult(
            hi, s.total_cost, gap, 0, gap <= eps, [],
            note="zero budget: nothing served",
        )

    s_lo = _pool_totals(problem, lo)
    if s_lo.total_cost <= budget:
        # Budget not binding: the cheapest multiplier already fits.
        gap = abs(s_lo.total_cost - budget)
        return SolverResult(
            lo, s_lo.total_cost, gap, 0, gap <= eps, [],
            note="budget not binding at the interval's lower end",
        )

    best_lam, best_cost, best_gap = hi, None, np.inf
    s_hi = _pool_totals(problem, hi)
    if s_hi.total_cost <= budget + eps:
        best_lam, best_cost, best_gap = hi, s_hi.total_cost, abs(s_hi.total_cost - budget)
    note = ""
    if s_hi.total_cost > budget:
        note = "interval does not bracket the budget; best-effort result"

    trace: list[tuple[float, float]] = []
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        mid = 0.5 * (lo + hi)
        s_mid = _pool_totals(problem, mid)
        trace.append((mid, s_mid.total_cost))
        gap = abs(s_mid.total_cost - budget)
        if s_mid.total_cost <= budget + eps and gap < best_gap:
            best_lam, best_cost, best_gap = mid, s_mid.total_cost, gap
        if gap <= eps:
            break
        if s_mid.total_cost > budget:
            lo = mid
        else:
            hi = mid

    if best_cost is None:
        # No evaluated point stayed within budget + epsilon.
        best_lam, best_cost = hi, s_hi.total_cost
        best_gap = abs(best_cost - budget)
    converged = best_gap <= eps
    if not converged and not note:
        note = "iteration cap reached before the cost gap closed"
    return SolverResult(best_lam, float(best_cost), float(best_gap), iterations, converged, trace, note)


def lambda_sweep(problem: AllocationProblem, lambda_grid) -> list[SweepPoint]:
    """Evaluate pool totals of the per-request rule over a multiplier grid."""
    points = []
    for lam in np.asarray(lambda_grid, dtype=float):
        lam = check_nonneg(float(lam), "lambda grid value")
        s = _pool_totals(problem, lam)
        points.append(SweepPoint(lam, s.total_gain, s.total_cost, s.served_count))
    return points


def sample_pool(gains, n: int, seed) -> np.ndarray:
    """Uniform sample (with replacement) of ``n`` rows from a gain matrix.

    Seeded and reproducible; the same ``(gains, n, seed)`` always yields
    the same pool.
    """
    arr = np.asarray(gains, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("gains must be a non-empty (N, M) matrix")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, arr.shape[0], size=n)
    return arr[idx]
