"""Shared fixtures: reference trajectories and a synthetic daily-counts file."""

from datetime import date, timedelta

import numpy as np
import pytest

from artifact import (
    ConstantSchedule,
    SimulationConfig,
    lotka_volterra,
    simulate,
    sir,
)

LV_OMEGA = np.array([0.7, 1.3, 1.1, 0.9])
SIR_OMEGA = np.array([0.5, 1.0 / 3.0])


@pytest.fixture(scope="session")
def lv_trajectory():
    """Reference orbit: x0=(1,1), t in [0,10], 1000 samples."""
    config = SimulationConfig(
        0.0, 10.0, 10.0 / 999.0, np.array([1.0, 1.0]), ConstantSchedule(LV_OMEGA)
    )
    return simulate(lotka_volterra(), config)


@pytest.fixture(scope="session")
def sir_trajectory():
    """80 daily states of the unit-population epidemic."""
    config = SimulationConfig(
        0.0, 79.0, 1.0, np.array([0.9999, 1e-4, 0.0]), ConstantSchedule(SIR_OMEGA)
    )
    return simulate(sir(1.0), config)


def synthetic_daily_counts(n_days, population=5.7e6, i0=3e4):
    """Daily new-case counts from a slowly reopening epidemic.

    Ground truth: beta(t) = 0.078 - 0.012 t / 130 with gamma = 0.072, solved
    at step 0.02 and read off once per day; counts are day-over-day
    differences of the rounded cumulative infections.
    """

    class _Ramp:
        def omega_at(self, t):
            return np.array([0.078 - 0.012 * t / 130.0, 0.072])

    config = SimulationConfig(
        0.0, float(n_days - 1), 0.02, np.array([population - i0, i0, 0.0]), _Ramp()
    )
    fine = simulate(sir(population), config)
    daily = fine.states[::50]
    cumulative = np.round(population - daily[:, 0]).astype(np.int64)
    return np.diff(np.concatenate([[0], cumulative]))


@pytest.fixture()
def who_csv(tmp_path):
    """100-day single-column WHO-style CSV of the synthetic epidemic."""
    counts = synthetic_daily_counts(100)
    path = tmp_path / "daily.csv"
    lines = ["date,new_cases"]
    for k, c in enumerate(counts):
        lines.append(f"{date(2020, 3, 1) + timedelta(days=k)},{c}")
    path.write_text("\n".join(lines) + "\n")
    return path
