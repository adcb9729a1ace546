import numpy as np
import pytest

from dynalloc import (
    ControllerState,
    PidGains,
    SystemStatus,
    apply_maxpower,
    compute_error,
    control_step,
    pid_update,
)


def make_state(bounds=(10.0, 100.0), setpoint=0.0, gain_to_power=1.0):
    return ControllerState(bounds=bounds, setpoint=setpoint, gain_to_power=gain_to_power)


class TestComputeError:
    def test_weighted_sum(self):
        status = SystemStatus(runtime=0.1, fail_rate=0.05)
        gains = PidGains(theta=2.0)
        assert compute_error(status, gains, setpoint=0.0) == pytest.approx(0.2)

    def test_at_target(self):
        status = SystemStatus(runtime=0.1, fail_rate=0.0)
        assert compute_error(status, PidGains(theta=2.0), setpoint=0.1) == 0.0

    def test_below_target(self):
        status = SystemStatus(runtime=0.05, fail_rate=0.0)
        assert compute_error(status, PidGains(theta=2.0), setpoint=0.1) == pytest.approx(-0.05)


class TestPidUpdate:
    def test_proportional_only(self):
        state = make_state()
        u = pid_update(state, PidGains(k_p=1.0, k_i=0.0, k_d=0.0), 0.5)
        assert u == 0.5

    def test_integral_accumulates(self):
        state = make_state()
        gains = PidGains(k_p=1.0, k_i=1.0, k_d=0.0)
        u1 = pid_update(state, gains, 0.5)
        u2 = pid_update(state, gains, 0.5)
        assert u1 == pytest.approx(1.0)
        assert u2 == pytest.approx(1.5)

    def test_derivative_term(self):
        state = make_state()
        gains = PidGains(k_p=0.0, k_i=0.0, k_d=1.0)
        pid_update(state, gains, 0.2)
        u2 = pid_update(state, gains, 0.5)
        assert u2 == pytest.approx(0.3)

    def test_memoryless_without_integral_and_derivative(self):
        gains = PidGains(k_p=2.0, k_i=0.0, k_d=0.0)
        state = make_state()
        for e in (0.5, -0.2, 0.9, 0.9):
            assert pid_update(state, gains, e) == pytest.approx(2.0 * e)
        assert state.integral == 0.0

    def test_antiwindup_clamps_integral(self):
        state = make_state(gain_to_power=1.0)
        gains = PidGains(k_p=0.0, k_i=1.0, k_d=0.0)
        cap = state.integral_cap(gains)  # (100 - 10) / (1 * 1)
        assert cap == 90.0
        for _ in range(50):
            pid_update(state, gains, 100.0)
        assert state.integral == cap
        # negative errors unwind but never below zero
        for _ in range(200):
            pid_update(state, gains, -10.0)
        assert state.integral == 0.0

    def test_state_stays_finite_for_bounded_errors(self):
        state = make_state()
        gains = PidGains(k_p=1.0, k_i=0.7, k_d=0.2)
        rng = np.random.default_rng(0)
        for e in rng.uniform(-5.0, 5.0, 1000):
            u = pid_update(state, gains, float(e))
            assert np.isfinite(u)
            assert np.isfinite(state.integral)
            assert 0.0 <= state.integral <= state.integral_cap(gains)


class TestApplyMaxpower:
    def test_zero_action_keeps_ceiling(self):
        state = make_state(bounds=(10.0, 100.0))
        assert apply_maxpower(state, 0.0) == 100.0

    def test_large_action_hits_floor(self):
        state = make_state(bounds=(10.0, 100.0))
        assert apply_maxpower(state, 1e9) == 10.0

    def test_linear_actuation(self):
        state = make_state(bounds=(10.0, 100.0), gain_to_power=5.0)
        assert apply_maxpower(state, 10.0) == 50.0

    def test_monotone_nonincreasing_in_u(self):
        state = make_state(bounds=(10.0, 100.0), gain_to_power=3.0)
        caps = [apply_maxpower(state, u) for u in np.linspace(-5, 50, 100)]
        assert all(a >= b for a, b in zip(caps, caps[1:]))
        assert all(10.0 <= c <= 100.0 for c in caps)

    def test_bounds_validation(self):
        with pytest.raises(ValueError, match="bounds"):
            ControllerState(bounds=(0.0, 10.0), setpoint=0.0)
        with pytest.raises(ValueError, match="bounds"):
            ControllerState(bounds=(10.0, 5.0), setpoint=0.0)


class TestControlStep:
    def test_steady_at_setpoint_keeps_ceiling(self):
        state = make_state(bounds=(10.0, 100.0), setpoint=0.12)
        gains = PidGains(k_p=1.0, k_i=0.5, k_d=0.0, theta=2.0)
        for _ in range(50):
            _, cap = control_step(state, gains, SystemStatus(runtime=0.12, fail_rate=0.0))
            assert cap == 100.0

    def test_fail_rate_step_lowers_cap_immediately(self):
        state = make_state(bounds=(10.0, 100.0), setpoint=0.12, gain_to_power=30.0)
        gains = PidGains(k_p=1.5, k_i=0.5, k_d=0.0, theta=2.0)
        control_step(state, gains, SystemStatus(runtime=0.1, fail_rate=0.0))
        before = state.max_power
        _, after = control_step(state, gains, SystemStatus(runtime=0.1, fail_rate=0.5))
        # one hand-traced step: e = 0.1 + 2*0.5 - 0.12 = 0.98,
        # u = 1.5*0.98 + 0.5*0.98 = 1.96, cap = 100 - 30*1.96 = 41.2
        assert after == pytest.approx(41.2)
        assert after < before

    def test_cap_recovers_after_disturbance(self):
        state = make_state(bounds=(10.0, 100.0), setpoint=0.12, gain_to_power=30.0)
        gains = PidGains(k_p=1.5, k_i=0.5, k_d=0.0, theta=2.0)
        for _ in range(5):
            control_step(state, gains, SystemStatus(runtime=1.0, fail_rate=0.8))
        assert state.max_power == 10.0
        steps = 0
        while state.max_power < 100.0:
            control_step(state, gains, SystemStatus(runtime=0.1, fail_rate=0.0))
            steps += 1
            assert steps < 1000, "cap failed to release after the disturbance"
        assert state.max_power == 100.0

    def test_cap_nonincreasing_while_error_positive(self):
        state = make_state(bounds=(10.0, 100.0), setpoint=0.1, gain_to_power=20.0)
        gains = PidGains(k_p=1.0, k_i=0.5, k_d=0.0, theta=2.0)
        prev = state.max_power
        for _ in range(30):
            _, cap = control_step(state, gains, SystemStatus(runtime=0.3, fail_rate=0.1))
            assert cap <= prev
            prev = cap
        assert prev == 10.0
