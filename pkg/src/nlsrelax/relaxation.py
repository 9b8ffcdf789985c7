r"""Energy relaxation on top of mass-preserving projection.

After a provisional Runge-Kutta step u~ the update direction is bent so
that two invariants of the semidiscrete system are preserved exactly:

1. the quadratic mass is restored by a projection pi onto the mass
   sphere (or ellipsoid, for the hyperbolic system);
2. a scalar step-size factor gamma is found so that the projected state
   pi(u^n + gamma (pi(u~) - u^n)) has the same energy as u^n, and the
   step is accepted as a step of size gamma*dt.

For a method of order p the root satisfies gamma = 1 + O(dt^{p-1}), so
the scheme retains its order of accuracy when the step counts time as
gamma*dt.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .integrators import ImexTableau, SplitOde, rk_step


class RelaxationFailure(ArithmeticError):
    """Raised when no admissible relaxation parameter exists."""


@dataclass(frozen=True)
class InvariantPair:
    """Energy functional, mass functional and mass projection for a model."""

    energy: Callable[[np.ndarray], float]
    mass: Callable[[np.ndarray], float]
    project_mass: Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class RelaxationConfig:
    gamma_tol: float = 1e-13
    bracket_width: float = 0.1
    max_expansions: int = 6
    max_iterations: int = 100


def solve_gamma(
    residual: Callable[[float], float],
    config: RelaxationConfig = RelaxationConfig(),
) -> float:
    """Find the root of the energy residual nearest to gamma = 1.

    The residual is sampled on a bracket around 1 which is widened
    geometrically until a sign change appears; Brent's method then
    polishes the root.
    """
    r1 = residual(1.0)
    if abs(r1) <= config.gamma_tol:
        return 1.0
    width = config.bracket_width
    for _ in range(config.max_expansions):
        lo, hi = 1.0 - width, 1.0 + width
        r_lo, r_hi = residual(lo), residual(hi)
        if np.sign(r_lo) != np.sign(r_hi):
            return brentq(residual, lo, hi, xtol=config.gamma_tol, maxiter=config.max_iterations)
        width *= 2.0
    raise RelaxationFailure(
        f"no sign change of the energy residual in [1 - {width}, 1 + {width}]"
    )


def quadratic_preserving_step(
    invariants: InvariantPair,
    config: RelaxationConfig = RelaxationConfig(),
):
    """Build a step function preserving both mass and energy exactly.

    The provisional update is first projected onto the mass level set,
    then the direction towards the projected point is relaxed until the
    energy matches; the relaxed point is projected once more so both
    invariants hold to round-off.
    """

    def step(ode: SplitOde, tableau: ImexTableau, y: np.ndarray, t: float, dt: float):
        mass0 = invariants.mass(y)
        energy0 = invariants.energy(y)
        y_trial = rk_step(ode, tableau, y, dt)
        direction = invariants.project_mass(y_trial, mass0) - y
        norm_dir = np.linalg.norm(direction)
        if norm_dir <= 1e-14 * max(np.linalg.norm(y), 1.0):
            raise RelaxationFailure(
                "degenerate step: provisional update does not move the state"
            )

        def residual(gamma: float) -> float:
            candidate = invariants.project_mass(y + gamma * direction, mass0)
            return invariants.energy(candidate) - energy0

        gamma = solve_gamma(residual, config)
        if gamma <= 0.0:
            raise RelaxationFailure(f"nonpositive relaxation parameter gamma = {gamma:.3e}")
        y_new = invariants.project_mass(y + gamma * direction, mass0)
        return y_new, gamma * dt, gamma

    return step


def standard_relaxation_step(
    invariants: InvariantPair,
    config: RelaxationConfig = RelaxationConfig(),
):
    """Classical single-invariant relaxation: only the energy is enforced,
    through a line search along the unprojected update direction."""

    def step(ode: SplitOde, tableau: ImexTableau, y: np.ndarray, t: float, dt: float):
        energy0 = invariants.energy(y)
        y_trial = rk_step(ode, tableau, y, dt)
        direction = y_trial - y
        if np.linalg.norm(direction) <= 1e-14 * max(np.linalg.norm(y), 1.0):
            raise RelaxationFailure(
                "degenerate step: provisional update does not move the state"
            )

        def residual(gamma: float) -> float:
            return invariants.energy(y + gamma * direction) - energy0

        gamma = solve_gamma(residual, config)
        if gamma <= 0.0:
            raise RelaxationFailure(f"nonpositive relaxation parameter gamma = {gamma:.3e}")
        return y + gamma * direction, gamma * dt, gamma

    return step


def project_mass_sphere(mass_diag: np.ndarray, n_fields: int = 2):
    """Projection onto a level set of sum_k x_k^T M x_k by uniform scaling.

    The flat vector is interpreted as n_fields stacked grid functions
    sharing the diagonal norm matrix M.
    """
    n = mass_diag.size

    def project(y: np.ndarray, target: float) -> np.ndarray:
        if y.size != n_fields * n:
            raise ValueError(f"expected vector of length {n_fields * n}, got {y.size}")
        current = sum(
            float(mass_diag @ y[k * n : (k + 1) * n] ** 2) for k in range(n_fields)
        )
        if current <= 0.0:
            raise RelaxationFailure("cannot project the zero state onto a mass sphere")
        return np.sqrt(target / current) * y

    return project
