r"""Benchmark problems for the cubic Schroedinger equation

    i u_t + u_xx + beta |u|^2 u = 0.

Each problem bundles the nonlinearity coefficient, the spatial domain
and the initial condition; problems with a known closed-form solution
also carry an exact trajectory for error measurements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .operators import OperatorSet


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    beta: float
    x_left: float
    x_right: float
    initial: Callable[[np.ndarray], np.ndarray]
    exact: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    notes: str = ""

    @property
    def has_exact(self) -> bool:
        return self.exact is not None


def _one_soliton() -> ProblemSpec:
    def exact(x, t):
        return 1.0 / np.cosh(x + 4.0 * t) * np.exp(-1j * (2.0 * x + 3.0 * t))

    return ProblemSpec(
        name="one_soliton",
        beta=2.0,
        x_left=-40.0,
        x_right=40.0,
        initial=lambda x: exact(x, 0.0),
        exact=exact,
        notes="travelling focusing soliton, exact solution known",
    )


def _bound_state(n_solitons: int) -> ProblemSpec:
    amplitude = float(n_solitons)

    def initial(x):
        return amplitude / np.cosh(x) + 0j

    return ProblemSpec(
        name={2: "two_soliton", 3: "three_soliton"}[n_solitons],
        beta=2.0,
        x_left=-35.0,
        x_right=35.0,
        initial=initial,
        notes=(
            f"{n_solitons}-soliton bound state from N*sech(x) data; "
            "breathes with period pi/4 and develops large derivatives"
        ),
    )


def _gray_soliton() -> ProblemSpec:
    """Defocusing gray soliton on a density background.

    The travelling wave is specified through its hydrodynamic density
    and velocity

        rho(xi) = b1 - (b1 - b2) / cosh^2(k xi),   k = sqrt(b1 - b2) / sqrt(2),
        theta_x(xi) = (c - b1 sqrt(b2) / rho(xi)) / sqrt(2),

    with xi = x - sqrt(2) c t, which solves i u_t + u_xx - |u|^2 u = 0
    for u = sqrt(rho) exp(i theta) with b1 > b2 > 0.  The phase integral
    has the closed form

        phi(xi) = (c - sqrt(b2)) / sqrt(2) * xi
                - arctan(sqrt((b1 - b2)/b2) * tanh(k xi)),

    and the temporal phase velocity vanishes for this parameter
    normalization.  The right boundary is chosen as the smallest value
    beyond x = 0 making the initial condition periodic, i.e. the total
    phase increment over the domain equals 2 pi m for an integer m.
    """
    b1, b2, c = 1.5, 1.0, 2.0
    k = np.sqrt(b1 - b2) / np.sqrt(2.0)
    speed = np.sqrt(2.0) * c

    def rho(xi):
        return b1 - (b1 - b2) / np.cosh(k * xi) ** 2

    def phi(xi):
        return (c - np.sqrt(b2)) / np.sqrt(2.0) * xi - np.arctan(
            np.sqrt((b1 - b2) / b2) * np.tanh(k * xi)
        )

    x_left = -30.0
    winding = 7  # smallest m with x_right > 0
    x_right = brentq(
        lambda xr: phi(xr) - phi(x_left) - 2.0 * np.pi * winding, 0.0, 200.0
    )

    def exact(x, t):
        # The construction is exactly periodic (the phase gains 2 pi m
        # over one domain length), so the travelling coordinate can be
        # wrapped back into the domain for arbitrary times.
        length = x_right - x_left
        xi = x_left + np.mod(x - speed * t - x_left, length)
        return np.sqrt(rho(xi)) * np.exp(1j * phi(xi))

    return ProblemSpec(
        name="gray_soliton",
        beta=-1.0,
        x_left=x_left,
        x_right=x_right,
        initial=lambda x: exact(x, 0.0),
        exact=exact,
        notes="defocusing travelling wave with nonzero background density",
    )


def _dispersive_shock() -> ProblemSpec:
    rho_left, rho_right = 2.0, 1.0

    def initial(x):
        rho = 0.5 * (rho_left + rho_right) + 0.5 * (rho_right - rho_left) * np.tanh(
            100.0 * x
        )
        return np.sqrt(rho) + 0j

    return ProblemSpec(
        name="dispersive_shock",
        beta=-1.0,
        x_left=-1600.0,
        x_right=1600.0,
        initial=initial,
        notes="smoothed Riemann problem in the density; zero initial phase",
    )


_REGISTRY: dict[str, Callable[[], ProblemSpec]] = {
    "one_soliton": _one_soliton,
    "two_soliton": lambda: _bound_state(2),
    "three_soliton": lambda: _bound_state(3),
    "gray_soliton": _gray_soliton,
    "dispersive_shock": _dispersive_shock,
}


def available_problems() -> list[str]:
    return sorted(_REGISTRY)


def get_problem(name: str) -> ProblemSpec:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r}; available: {', '.join(available_problems())}"
        ) from None
    return factory()


def l2_norm(ops: OperatorSet, z: np.ndarray) -> float:
    """Discrete L2 norm induced by the diagonal mass matrix."""
    z = np.asarray(z)
    return float(np.sqrt(ops.mass_diag @ np.abs(z) ** 2))


def l2_error(ops: OperatorSet, u: np.ndarray, u_ref: np.ndarray) -> float:
    return l2_norm(ops, np.asarray(u) - np.asarray(u_ref))


def to_hydro(u: np.ndarray, ops: OperatorSet) -> tuple[np.ndarray, np.ndarray]:
    """Madelung variables (density, velocity) of a complex grid function.

    The phase is recovered with the two-argument arc tangent and
    unwrapped across branch cuts.  On periodic domains the unwrapped
    phase generally carries a linear winding of 2 pi m over the domain;
    that part is removed before differentiating and its exact slope is
    added back, so the velocity of winding solutions is computed without
    endpoint artifacts.
    """
    u = np.asarray(u)
    density = np.abs(u) ** 2
    theta = np.unwrap(np.angle(u))
    if ops.grid.periodic:
        length = ops.grid.length
        dx = ops.grid.dx
        # Phase gain over one period, rounded to the nearest multiple of 2 pi.
        gain = theta[-1] - theta[0]
        slope_est = gain / (length - dx)
        m = np.round(slope_est * length / (2.0 * np.pi))
        slope = 2.0 * np.pi * m / length
        fluctuation = theta - slope * ops.grid.nodes
        velocity = ops.d1(fluctuation) + slope
    else:
        velocity = ops.d1(theta)
    return density, velocity


def fit_growth_rate(times: np.ndarray, errors: np.ndarray) -> float:
    """Least-squares slope of log(error) against log(time)."""
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = (times > 0) & (errors > 0)
    if np.count_nonzero(keep) < 2:
        raise ValueError("need at least two positive samples to fit a growth rate")
    return float(np.polyfit(np.log(times[keep]), np.log(errors[keep]), 1)[0])


def fit_convergence_rate(spacings: np.ndarray, errors: np.ndarray) -> float:
    """Least-squares slope of log(error) against log(dt or dx)."""
    return fit_growth_rate(spacings, errors)
