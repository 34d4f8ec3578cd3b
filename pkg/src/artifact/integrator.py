"""Fixed-step explicit fourth-order Runge-Kutta simulation.

The step size doubles as the output sampling interval: every solver step is
stored. Parameter schedules are evaluated once at the start of each step and
held constant through the four stages. States are never clipped; the only
runtime failure is NonFiniteState when a stage produces NaN or Inf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .differentiation import TimeSeries
from .errors import NonFiniteState, ShapeMismatch
from .models import ParameterLinearModel


class ConstantSchedule:
    """Time-invariant parameter vector."""

    def __init__(self, omega):
        self.omega = np.asarray(omega, dtype=float)

    def omega_at(self, t: float) -> np.ndarray:
        return self.omega


class PiecewiseSchedule:
    """Step-function schedule: omega_at(t) is the row of the latest t_i <= t.

    Before the first table time the first row applies.
    """

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.values.ndim != 2:
            raise ShapeMismatch("need times (n,) and values (n, k)")
        if self.times.shape[0] != self.values.shape[0]:
            raise ShapeMismatch("schedule table lengths differ")
        if self.times.shape[0] == 0:
            raise ShapeMismatch("schedule table is empty")
        if not np.all(np.diff(self.times) > 0):
            raise ValueError("schedule times must be strictly increasing")

    def omega_at(self, t: float) -> np.ndarray:
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.values[max(idx, 0)]


class SinusoidalBetaSchedule:
    """Sinusoidal modulation of one parameter around a mean.

    omega[index] = amplitude * sin(2 pi t / period) + mean; all other entries
    come from the base vector.
    """

    def __init__(self, base_omega, mean, amplitude, period, index: int = 0):
        self.base = np.asarray(base_omega, dtype=float)
        self.mean = float(mean)
        self.amplitude = float(amplitude)
        self.period = float(period)
        self.index = int(index)
        if self.period <= 0:
            raise ValueError("period must be positive")
        if not 0 <= self.index < self.base.shape[0]:
            raise ShapeMismatch("modulated index outside the parameter vector")

    def value_at(self, t: float) -> float:
        return self.amplitude * np.sin(2.0 * np.pi * t / self.period) + self.mean

    def omega_at(self, t: float) -> np.ndarray:
        omega = self.base.copy()
        omega[self.index] = self.value_at(t)
        return omega


@dataclass(frozen=True)
class SimulationConfig:
    t0: float
    t_end: float
    step: float
    initial_state: np.ndarray
    schedule: object

    def __post_init__(self):
        if self.t_end <= self.t0:
            raise ValueError("t_end must exceed t0")
        if not 0 < self.step <= self.t_end - self.t0:
            raise ValueError("step must be positive and at most the horizon")
        object.__setattr__(
            self, "initial_state", np.asarray(self.initial_state, dtype=float)
        )


def erk4_step(
    model: ParameterLinearModel, state: np.ndarray, t: float, omega, h: float
) -> np.ndarray:
    """One classical RK4 update with omega held fixed across the stages."""
    if h <= 0:
        raise ValueError("step must be positive")
    omega = np.asarray(omega, dtype=float)

    def rhs(x, tt):
        return model.build_matrix(x, tt) @ omega

    k1 = rhs(state, t)
    k2 = rhs(state + 0.5 * h * k1, t + 0.5 * h)
    k3 = rhs(state + 0.5 * h * k2, t + 0.5 * h)
    k4 = rhs(state + h * k3, t + h)
    new_state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new_state)):
        raise NonFiniteState(f"non-finite state after step from t={t}")
    return new_state


def simulate(model: ParameterLinearModel, config: SimulationConfig) -> TimeSeries:
    """Integrate from t0 to t_end inclusive (within half-step tolerance)."""
    state = np.asarray(config.initial_state, dtype=float)
    if state.shape != (model.n_states,):
        raise ShapeMismatch(
            f"initial state has shape {state.shape}, model wants ({model.n_states},)"
        )
    n_steps = int(np.floor((config.t_end - config.t0) / config.step + 0.5))
    times = config.t0 + config.step * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, model.n_states))
    states[0] = state
    for i in range(n_steps):
        t = times[i]
        omega = config.schedule.omega_at(t)
        try:
            state = erk4_step(model, state, t, omega, config.step)
        except NonFiniteState:
            raise NonFiniteState(f"non-finite state at step {i + 1} (t={t})") from None
        states[i + 1] = state
    return TimeSeries(times, states)
