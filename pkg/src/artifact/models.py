"""Parameter-linear model descriptors and the three built-in systems.

A model is parameter-linear when its right-hand side factors as
dx/dt = A(x; t) @ omega with A independent of omega. Estimation then reduces
to linear regression on stacked A blocks. Built-ins:

- lotka_volterra: prey/predator, 2 states, parameters (alpha, beta, gamma, delta)
- sir: susceptible/infected/recovered, parameters (beta, gamma)
- s3i3r: 7 compartments (S, I1, I2, I3, R1, R2, R3) with hospital, ICU,
  vaccination and death flows, parameters
  (beta, gamma1, gamma2, gamma3, tau, theta, phi1, phi2)

The epidemic matrices have zero column sums by construction, so the total
population is conserved for any parameter vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DegenerateDenominator,
    NonPositivePopulation,
    ShapeMismatch,
)


@dataclass(frozen=True)
class ParameterLinearModel:
    """Named model with a builder for the system matrix A(x; t)."""

    name: str
    state_names: tuple
    parameter_names: tuple
    build_matrix: Callable[[np.ndarray, float], np.ndarray]
    population: float | None = None

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def n_params(self) -> int:
        return len(self.parameter_names)

    def parameter_index(self, name: str) -> int:
        try:
            return self.parameter_names.index(name)
        except ValueError:
            raise ShapeMismatch(
                f"model {self.name} has no parameter {name!r}"
            ) from None


def _as_state(state, expected: int) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    if state.shape != (expected,):
        raise ShapeMismatch(f"expected state of length {expected}, got {state.shape}")
    return state


def lotka_volterra_matrix(state) -> np.ndarray:
    """2x4 system matrix for prey x and predator y."""
    x, y = _as_state(state, 2)
    return np.array(
        [
            [x, -x * y, 0.0, 0.0],
            [0.0, 0.0, -y, x * y],
        ]
    )


def sir_matrix(state, population: float) -> np.ndarray:
    """3x2 system matrix; columns (beta, gamma) each sum to zero."""
    if population <= 0:
        raise NonPositivePopulation(f"population {population} must be positive")
    s, i, _ = _as_state(state, 3)
    si = s * i / population
    return np.array(
        [
            [-si, 0.0],
            [si, -i],
            [0.0, i],
        ]
    )


def s3i3r_matrix(state, population: float) -> np.ndarray:
    """7x8 system matrix with columns (beta, gamma1, gamma2, gamma3, tau, theta, phi1, phi2).

    The vaccination column (tau) moves people out of S, I1 and R1 in
    proportion to their share of the vaccinatable pool V = S + I1 + R1, and
    into R2 at unit rate, so the column sums to zero like all others.
    """
    if population <= 0:
        raise NonPositivePopulation(f"population {population} must be positive")
    s, i1, i2, i3, r1, _, _ = _as_state(state, 7)
    pool = s + i1 + r1
    if pool == 0.0:
        raise DegenerateDenominator("vaccinatable pool S + I1 + R1 is zero")
    si = s * i1 / population
    return np.array(
        [
            [-si, 0.0, 0.0, 0.0, -s / pool, 0.0, 0.0, 0.0],
            [si, -i1, 0.0, 0.0, -i1 / pool, 0.0, -i1, 0.0],
            [0.0, 0.0, -i2, 0.0, 0.0, 0.0, i1, -i2],
            [0.0, 0.0, 0.0, -i3, 0.0, -i3, 0.0, i2],
            [0.0, i1, i2, i3, -r1 / pool, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, i3, 0.0, 0.0],
        ]
    )


def eval_rhs(model: ParameterLinearModel, state, omega, t: float = 0.0) -> np.ndarray:
    """Right-hand side A(x; t) @ omega."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (model.n_params,):
        raise ShapeMismatch(
            f"expected {model.n_params} parameters, got shape {omega.shape}"
        )
    return model.build_matrix(np.asarray(state, dtype=float), t) @ omega


def lotka_volterra() -> ParameterLinearModel:
    return ParameterLinearModel(
        name="lotka_volterra",
        state_names=("prey", "predator"),
        parameter_names=("alpha", "beta", "gamma", "delta"),
        build_matrix=lambda state, t: lotka_volterra_matrix(state),
    )


def sir(population: float) -> ParameterLinearModel:
    if population <= 0:
        raise NonPositivePopulation(f"population {population} must be positive")
    return ParameterLinearModel(
        name="sir",
        state_names=("S", "I", "R"),
        parameter_names=("beta", "gamma"),
        build_matrix=lambda state, t: sir_matrix(state, population),
        population=population,
    )


def s3i3r(population: float) -> ParameterLinearModel:
    if population <= 0:
        raise NonPositivePopulation(f"population {population} must be positive")
    return ParameterLinearModel(
        name="s3i3r",
        state_names=("S", "I1", "I2", "I3", "R1", "R2", "R3"),
        parameter_names=(
            "beta",
            "gamma1",
            "gamma2",
            "gamma3",
            "tau",
            "theta",
            "phi1",
            "phi2",
        ),
        build_matrix=lambda state, t: s3i3r_matrix(state, population),
        population=population,
    )


_REGISTRY: dict = {
    "lotka_volterra": lotka_volterra,
    "sir": sir,
    "s3i3r": s3i3r,
}


def register_model(name: str, factory: Callable) -> None:
    """Add a custom model factory to the registry used by the CLI."""
    _REGISTRY[name] = factory


def get_model(name: str, population: float | None = None) -> ParameterLinearModel:
    """Look a model up by registry name."""
    if name not in _REGISTRY:
        raise ShapeMismatch(
            f"unknown model {name!r}; registered: {sorted(_REGISTRY)}"
        )
    factory = _REGISTRY[name]
    if name == "lotka_volterra":
        return factory()
    if population is None:
        raise NonPositivePopulation(f"model {name!r} needs a population constant")
    return factory(population)
