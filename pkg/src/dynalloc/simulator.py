"""Discrete-time simulation of a cascade serving system.

Each tick draws Poisson arrivals, prices them through the active policy
(fixed action, or the per-request rule under the current multiplier and
cost cap), pushes the chosen work through a capacity/latency surrogate,
and feeds the measured health back into the cap controller. The
multiplier is re-solved periodically on a window of recent requests with
the budget scaled by observed traffic.

Failure semantics: work is admitted in arrival order up to the hard
capacity; arrivals beyond it fail without consuming computation. When the
offered utilization pushes the latency surrogate past the timeout, the
queue-tail fraction ``1 - timeout/latency`` of admitted requests fails
too - their computation is spent but earns nothing. Requests the policy
deliberately skips are not failures.

Determinism: traffic, gain generation, and pool sampling draw from three
independent seeded streams, so repeated runs (and baseline/dynamic pairs
sharing a seed) see identical request sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .controller import ControllerState, PidGains, SystemStatus, control_step
from .core import NO_ACTION, ActionSpace, AllocationProblem, select_actions
from .gains import LinearGainModel, SyntheticGainParams, synthetic_rows
from .solver import SolverConfig, adjust_budget, sample_pool, solve_lambda


@dataclass(frozen=True)
class TrafficSchedule:
    """Piecewise-constant arrival rates: (start_tick, rate) segments."""

    segments: tuple[tuple[int, float], ...]

    def __post_init__(self):
        segs = tuple((int(t), float(r)) for t, r in self.segments)
        if not segs:
            raise ValueError("schedule needs at least one segment")
        if segs[0][0] != 0:
            raise ValueError("first segment must start at tick 0")
        starts = [t for t, _ in segs]
        if any(b < a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start ticks must be non-decreasing")
        if any(r < 0 for _, r in segs):
            raise ValueError("arrival rates must be non-negative")
        object.__setattr__(self, "segments", segs)

    def rate_at(self, tick: int) -> float:
        rate = self.segments[0][1]
        for start, r in self.segments:
            if start <= tick:
                rate = r
            else:
                break
        return rate


def inject_spike(schedule: TrafficSchedule, tick: int, multiplier: float) -> TrafficSchedule:
    """Append a segment multiplying the prevailing rate from ``tick`` on."""
    if multiplier <= 0:
        raise ValueError(f"multiplier must be positive, got {multiplier}")
    last_start = schedule.segments[-1][0]
    if tick < last_start:
        raise ValueError(
            f"spike tick {tick} precedes the last segment start {last_start}"
        )
    prevailing = schedule.rate_at(tick)
    return TrafficSchedule(schedule.segments + ((tick, prevailing * multiplier),))


@dataclass(frozen=True)
class CapacityModel:
    """Scalar serving-capacity surrogate.

    ``capacity`` is the evaluation quota the system can absorb per tick.
    Latency grows as ``base_runtime / (1 - utilization)**overload_curve``,
    saturating once the headroom falls below ``saturation_floor`` and
    capped at ``timeout``.
    """

    capacity: float
    base_runtime: float = 0.1
    timeout: float = 1.0
    overload_curve: float = 1.0
    saturation_floor: float = 0.05

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        if self.base_runtime <= 0:
            raise ValueError("base_runtime must be positive")
        if self.timeout <= self.base_runtime:
            raise ValueError("timeout must exceed base_runtime")
        if not (0 < self.saturation_floor < 1):
            raise ValueError("saturation_floor must be in (0, 1)")
        if self.overload_curve <= 0:
            raise ValueError("overload_curve must be positive")

    def raw_latency(self, utilization: float) -> float:
        headroom = max(1.0 - utilization, self.saturation_floor)
        return self.base_runtime / headroom**self.overload_curve


BASELINE = "baseline"
DYNAMIC = "dynamic"


@dataclass(frozen=True)
class PolicyMode:
    """Either a fixed action for every request, or the priced rule with an
    optional cap controller."""

    kind: str = DYNAMIC
    baseline_action: int = 0
    controller_enabled: bool = True

    def __post_init__(self):
        if self.kind not in (BASELINE, DYNAMIC):
            raise ValueError(f"kind must be '{BASELINE}' or '{DYNAMIC}', got {self.kind!r}")


@dataclass(frozen=True)
class TickMetrics:
    """One simulated tick of aggregated serving metrics."""

    tick: int
    arrivals: int
    qps: float
    runtime: float
    fail_rate: float
    total_cost: float
    total_gain: float
    max_power: float
    lam: float
    served: int
    failed: int
    skipped: int
    utilization: float
    control_error: float = 0.0
    control_action: float = 0.0


class SyntheticGainSource:
    """Draws gain rows from the power-law family."""

    def __init__(self, params: SyntheticGainParams, actions: ActionSpace):
        self.params = params
        self.actions = actions

    def sample(self, rng, n: int) -> np.ndarray:
        return synthetic_rows(self.params, self.actions.costs, n, rng)


class EstimatorGainSource:
    """Draws feature vectors and scores them with a fitted gain model."""

    def __init__(self, model: LinearGainModel, feature_sigma: float = 1.0):
        if not hasattr(model, "coef_"):
            raise ValueError("gain model is not fitted")
        self.model = model
        self.feature_sigma = feature_sigma

    def sample(self, rng, n: int) -> np.ndarray:
        X = rng.normal(0.0, self.feature_sigma, (n, self.model.n_features_in_))
        return self.model.predict_matrix(X)


@dataclass(frozen=True)
class SimConfig:
    """Everything a run needs; a config plus a seed fully determines it."""

    ticks: int
    schedule: TrafficSchedule
    capacity: CapacityModel
    policy: PolicyMode
    actions: ActionSpace
    gain_params: SyntheticGainParams = field(default_factory=SyntheticGainParams)
    gain_source: object | None = None
    budget_per_tick: float = 0.0
    qps_reference: float = 1.0
    refresh_period: int = 10
    pool_size: int = 1000
    pid: PidGains = field(default_factory=PidGains)
    mp_bounds: tuple[float, float] | None = None
    setpoint: float | None = None
    gain_to_power: float = 1.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 0

    def __post_init__(self):
        if self.ticks < 0:
            raise ValueError("ticks must be non-negative")
        if self.budget_per_tick < 0:
            raise ValueError("budget_per_tick must be non-negative")
        if self.qps_reference <= 0:
            raise ValueError("qps_reference must be positive")
        if self.refresh_period < 0:
            raise ValueError("refresh_period must be non-negative")
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if not (0 <= self.policy.baseline_action < self.actions.n_actions):
            raise ValueError("baseline_action out of range for the action space")

    def make_gain_source(self):
        return self.gain_source or SyntheticGainSource(self.gain_params, self.actions)

    def make_controller_state(self) -> ControllerState:
        costs = self.actions.costs
        bounds = self.mp_bounds or (float(costs[0]), float(costs[-1]))
        setpoint = (
            self.setpoint
            if self.setpoint is not None
            else 1.2 * self.capacity.base_runtime
        )
        return ControllerState(
            bounds=bounds, setpoint=setpoint, gain_to_power=self.gain_to_power
        )


def _solve_window_lambda(config, rows, observed_qps, rng_policy):
    """Re-solve the multiplier on a sampled pool with the traffic-adjusted
    budget; returns the previous value when nothing arrived."""
    pool = sample_pool(rows, config.pool_size, rng_policy)
    budget_hat = adjust_budget(config.budget_per_tick, config.qps_reference, observed_qps)
    pool_budget = config.pool_size * budget_hat / config.qps_reference
    problem = AllocationProblem(config.actions, pool, pool_budget)
    result = solve_lambda(problem, config.solver, on_violation="skip")
    return result.lambda_star


def run_simulation(config: SimConfig) -> list[TickMetrics]:
    """Run one policy over the configured horizon. Deterministic per seed."""
    streams = np.random.SeedSequence(config.seed).spawn(3)
    rng_traffic = np.random.default_rng(streams[0])
    rng_gains = np.random.default_rng(streams[1])
    rng_policy = np.random.default_rng(streams[2])

    source = config.make_gain_source()
    costs = config.actions.costs
    cap_model = config.capacity
    dynamic = config.policy.kind == DYNAMIC

    lam = 0.0
    if dynamic:
        warm = source.sample(rng_policy, config.pool_size)
        lam = _solve_window_lambda(config, warm, config.qps_reference, rng_policy)

    state = config.make_controller_state()
    use_controller = dynamic and config.policy.controller_enabled
    ceiling = float(costs[-1])

    window_rows: list[np.ndarray] = []
    window_arrivals: list[int] = []
    metrics: list[TickMetrics] = []

    for tick in range(config.ticks):
        rate = config.schedule.rate_at(tick)
        n = int(rng_traffic.poisson(rate)) if rate > 0 else 0
        rows = source.sample(rng_gains, n)

        applied_cap = state.max_power if use_controller else ceiling
        if n == 0:
            choices = np.empty(0, dtype=np.int64)
        elif dynamic:
            cap = applied_cap if use_controller else None
            choices = select_actions(rows, costs, lam, max_power=cap)
        else:
            choices = np.full(n, config.policy.baseline_action, dtype=np.int64)

        attempted = choices != NO_ACTION
        chosen_costs = np.where(attempted, costs[np.clip(choices, 0, None)], 0.0)
        offered = float(chosen_costs.sum())
        utilization = offered / cap_model.capacity

        admitted = attempted & (np.cumsum(chosen_costs) <= cap_model.capacity)
        n_spill = int(attempted.sum() - admitted.sum())

        if n > 0 and attempted.any():
            rt_raw = cap_model.raw_latency(utilization)
            runtime = min(rt_raw, cap_model.timeout)
            overrun = max(0.0, 1.0 - cap_model.timeout / rt_raw)
        else:
            runtime = 0.0
            overrun = 0.0
        n_admitted = int(admitted.sum())
        n_timeout = int(np.floor(overrun * n_admitted))
        ok = admitted.copy()
        if n_timeout > 0:
            ok[np.flatnonzero(admitted)[-n_timeout:]] = False

        failed = n_spill + n_timeout
        served = int(ok.sum())
        skipped = int(n - attempted.sum())
        total_cost = float(chosen_costs[admitted].sum())
        ok_idx = np.flatnonzero(ok)
        total_gain = float(rows[ok_idx, choices[ok_idx]].sum()) if served else 0.0
        fail_rate = failed / n if n else 0.0

        if use_controller:
            status = SystemStatus(runtime, fail_rate, qps=float(n), utilization=utilization)
            control_step(state, config.pid, status)

        window_rows.append(rows)
        window_arrivals.append(n)
        if config.refresh_period > 0 and len(window_rows) > config.refresh_period:
            window_rows.pop(0)
            window_arrivals.pop(0)
        if (
            dynamic
            and config.refresh_period > 0
            and (tick + 1) % config.refresh_period == 0
            and sum(window_arrivals) > 0
        ):
            recent = np.concatenate([r for r in window_rows if len(r)], axis=0)
            observed_qps = sum(window_arrivals) / len(window_arrivals)
            lam = _solve_window_lambda(config, recent, observed_qps, rng_policy)

        metrics.append(
            TickMetrics(
                tick=tick,
                arrivals=n,
                qps=float(n),
                runtime=runtime,
                fail_rate=fail_rate,
                total_cost=total_cost,
                total_gain=total_gain,
                max_power=applied_cap,
                lam=lam if dynamic else 0.0,
                served=served,
                failed=failed,
                skipped=skipped,
                utilization=utilization,
                control_error=state.prev_error if use_controller else 0.0,
                control_action=state.last_action if use_controller else 0.0,
            )
        )
    return metrics


@dataclass(frozen=True)
class ComparisonSummary:
    """Totals of a paired run plus offline matched-cost/matched-gain points
    computed on the shared request sample."""

    baseline_gain: float
    baseline_cost: float
    baseline_fail_rate: float
    dynamic_gain: float
    dynamic_cost: float
    dynamic_fail_rate: float
    pool_baseline_gain: float
    pool_baseline_cost: float
    gain_at_equal_cost: float
    cost_at_equal_gain: float


@dataclass(frozen=True)
class PolicyComparison:
    dynamic: list[TickMetrics]
    baseline: list[TickMetrics]
    summary: ComparisonSummary


def compare_policies(config: SimConfig, sample_cap: int = 100_000) -> PolicyComparison:
    """Run both policies on identical arrivals and summarize.

    The matched-cost / matched-gain entries are computed offline on a
    request sample regenerated from the shared gain stream, answering
    "what would the priced rule earn at the fixed policy's spend level"
    and "what would it spend to reach the fixed policy's gain level".
    """
    from .experiments import gain_at_matched_cost, cost_at_matched_gain

    dyn = run_simulation(replace(config, policy=replace(config.policy, kind=DYNAMIC)))
    base = run_simulation(replace(config, policy=replace(config.policy, kind=BASELINE)))

    def totals(ms):
        arrivals = sum(m.arrivals for m in ms)
        failed = sum(m.failed for m in ms)
        return (
            sum(m.total_gain for m in ms),
            sum(m.total_cost for m in ms),
            failed / arrivals if arrivals else 0.0,
        )

    b_gain, b_cost, b_fr = totals(base)
    d_gain, d_cost, d_fr = totals(dyn)

    # Offline comparison pool: same gain distribution, dedicated stream.
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(4)[3])
    n_pool = min(sample_cap, max(config.pool_size, 1000))
    rows = config.make_gain_source().sample(rng, n_pool)
    costs = config.actions.costs
    j_base = config.policy.baseline_action
    pool_base_gain = float(rows[:, j_base].sum())
    pool_base_cost = float(n_pool * costs[j_base])
    eq_cost = gain_at_matched_cost(rows, costs, pool_base_cost)
    eq_gain = cost_at_matched_gain(rows, costs, pool_base_gain)

    return PolicyComparison(
        dynamic=dyn,
        baseline=base,
        summary=ComparisonSummary(
            baseline_gain=b_gain,
            baseline_cost=b_cost,
            baseline_fail_rate=b_fr,
            dynamic_gain=d_gain,
            dynamic_cost=d_cost,
            dynamic_fail_rate=d_fr,
            pool_baseline_gain=pool_base_gain,
            pool_baseline_cost=pool_base_cost,
            gain_at_equal_cost=eq_cost.total_gain,
            cost_at_equal_gain=eq_gain.total_cost,
        ),
    )
