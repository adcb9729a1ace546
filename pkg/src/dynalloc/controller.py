"""Feedback control of the per-request cost cap (MaxPower).

A PID loop turns the observed runtime and failure rate into a single
instability signal and actuates a cap on how expensive an action any
request may take. Rising instability lowers the cap toward the cheapest
action; sustained health releases it back to the ceiling.

The loop is single-writer: one control loop owns and mutates the
:class:`ControllerState`; the serving path only reads the ``max_power``
value published by :func:`control_step`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PidGains:
    """Proportional/integral/derivative weights and the fail-rate scale."""

    k_p: float = 1.5
    k_i: float = 0.5
    k_d: float = 0.0
    theta: float = 2.0

    def __post_init__(self):
        for name in ("k_p", "k_i", "k_d", "theta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class SystemStatus:
    """One monitoring window of serving health."""

    runtime: float
    fail_rate: float
    qps: float = 0.0
    utilization: float = 0.0

    def __post_init__(self):
        if self.runtime < 0:
            raise ValueError(f"runtime must be non-negative, got {self.runtime}")
        if not (0.0 <= self.fail_rate <= 1.0):
            raise ValueError(f"fail_rate must be in [0, 1], got {self.fail_rate}")


@dataclass
class ControllerState:
    """Mutable loop state plus the actuation parameters.

    ``max_power`` always stays within ``bounds``; ``gain_to_power`` converts
    one unit of control action into cap units. ``setpoint`` is the tolerable
    instability level (runtime plus scaled fail rate) at which the loop is
    at rest: a zero setpoint would pin the cap at its floor whenever the
    runtime is nonzero.
    """

    bounds: tuple[float, float]
    setpoint: float
    gain_to_power: float = 1.0
    integral: float = 0.0
    prev_error: float = 0.0
    last_action: float = 0.0
    max_power: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        lo, hi = self.bounds
        if not (0 < lo <= hi):
            raise ValueError(f"bounds must satisfy 0 < min <= max, got {self.bounds}")
        if self.gain_to_power <= 0:
            raise ValueError("gain_to_power must be positive")
        if self.max_power is None:
            self.max_power = hi
        if not (lo <= self.max_power <= hi):
            raise ValueError("max_power must lie within bounds")

    def integral_cap(self, gains: PidGains) -> float:
        """Anti-windup limit: the integral alone may only command a cap
        excursion spanning the actuation range."""
        lo, hi = self.bounds
        if gains.k_i <= 0:
            return 0.0
        return (hi - lo) / (self.gain_to_power * gains.k_i)


def compute_error(status: SystemStatus, gains: PidGains, setpoint: float) -> float:
    """Instability above target: ``(runtime + theta * fail_rate) - setpoint``."""
    return (status.runtime + gains.theta * status.fail_rate) - setpoint


def pid_update(state: ControllerState, gains: PidGains, error: float) -> float:
    """Advance the PID state by one window and return the control action.

    The integral accumulates the error, clamped to ``[0, integral_cap]``;
    with ``k_i == 0`` it stays at zero so pure P/D control is memoryless.
    """
    if gains.k_i > 0:
        cap = state.integral_cap(gains)
        state.integral = min(max(state.integral + error, 0.0), cap)
    u = (
        gains.k_p * error
        + gains.k_i * state.integral
        + gains.k_d * (error - state.prev_error)
    )
    state.prev_error = error
    state.last_action = u
    return u


def apply_maxpower(state: ControllerState, u: float) -> float:
    """Actuate the cap: larger control action pushes it further below the
    ceiling, clamped to the configured bounds."""
    lo, hi = state.bounds
    state.max_power = float(min(max(hi - state.gain_to_power * u, lo), hi))
    return state.max_power


def control_step(
    state: ControllerState, gains: PidGains, status: SystemStatus
) -> tuple[ControllerState, float]:
    """One loop iteration: error, PID update, actuation. Returns the state
    and the new cap for the serving path."""
    error = compute_error(status, gains, state.setpoint)
    u = pid_update(state, gains, error)
    cap = apply_maxpower(state, u)
    return state, cap
