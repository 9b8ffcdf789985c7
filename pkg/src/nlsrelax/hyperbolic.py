r"""First-order hyperbolic approximation of the cubic Schroedinger
equation.

The second derivative is split through auxiliary fields nu ~ d_x v and
omega ~ d_x w driven by stiff relaxation with time scale tau:

    dv/dt  = -D- omega - beta (v^2 + w^2) w,
    dw/dt  = +D- nu    + beta (v^2 + w^2) v,
    dnu/dt = (D+ w - omega) / tau,
    dom/dt = (-D+ v + nu) / tau,

built on an upwind operator pair (D+, D-).  As tau -> 0 the auxiliary
fields relax to nu = D+ v, omega = D+ w and the system reduces to the
Schroedinger semidiscretization with D2 = D- D+.

Conserved quadratic quantities:

    mass   = v^T M v + w^T M w + tau (nu^T M nu + om^T M om),
    energy = 2 nu^T M D+ v - nu^T M nu
           + 2 om^T M D+ w - om^T M om
           - (beta/2) 1^T M (v^2 + w^2)^2.

The mass level sets are ellipsoids, so the mass-preserving projection
needed by the relaxation integrators scales the physical and auxiliary
blocks by different factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .integrators import SplitOde
from .operators import OperatorSet


class ProjectionFailure(ArithmeticError):
    """Raised when no real scaling reaches the target mass ellipsoid."""


@dataclass
class HypState:
    v: np.ndarray
    w: np.ndarray
    nu: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        self.nu = np.asarray(self.nu, dtype=float)
        self.omega = np.asarray(self.omega, dtype=float)

    @property
    def n(self) -> int:
        return self.v.size

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.v, self.w, self.nu, self.omega])

    @classmethod
    def from_array(cls, y: np.ndarray) -> "HypState":
        n = y.size // 4
        return cls(*(y[k * n : (k + 1) * n].copy() for k in range(4)))

    def to_complex(self) -> np.ndarray:
        return self.v + 1j * self.w


@dataclass
class HypParams:
    beta: float
    tau: float
    ops: OperatorSet
    _solver_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("relaxation time tau must be positive")
        if self.ops.d_plus is None or self.ops.d_minus is None:
            raise ValueError("hyperbolic model requires an upwind operator pair")

    @property
    def n(self) -> int:
        return self.ops.n


def well_prepared_init(params: HypParams, v: np.ndarray, w: np.ndarray) -> HypState:
    """Initialize the auxiliary fields on the slow manifold nu = D+ v."""
    dp = params.ops.d_plus
    return HypState(np.array(v, dtype=float), np.array(w, dtype=float), dp(v), dp(w))


def hyp_rhs(params: HypParams, s: HypState) -> HypState:
    dp, dm = params.ops.d_plus, params.ops.d_minus
    cubic = params.beta * (s.v**2 + s.w**2)
    return HypState(
        -dm(s.omega) - cubic * s.w,
        dm(s.nu) + cubic * s.v,
        (dp(s.w) - s.omega) / params.tau,
        (-dp(s.v) + s.nu) / params.tau,
    )


def hyp_mass(params: HypParams, s: HypState) -> float:
    m = params.ops.mass_diag
    physical = float(m @ s.v**2 + m @ s.w**2)
    auxiliary = float(m @ s.nu**2 + m @ s.omega**2)
    return physical + params.tau * auxiliary


def hyp_energy(params: HypParams, s: HypState) -> float:
    m = params.ops.mass_diag
    dp = params.ops.d_plus
    kinetic = float(
        2.0 * (m * s.nu) @ dp(s.v)
        - m @ s.nu**2
        + 2.0 * (m * s.omega) @ dp(s.w)
        - m @ s.omega**2
    )
    density = s.v**2 + s.w**2
    return kinetic - 0.5 * params.beta * float(m @ density**2)


def _linear_blocks(params: HypParams) -> sp.csr_matrix:
    """Sparse matrix of the stiff linear right-hand side on (v, w, nu, om)."""
    n = params.n
    dp = params.ops.d_plus.to_sparse()
    dm = params.ops.d_minus.to_sparse()
    eye = sp.identity(n, format="csr")
    z = sp.csr_matrix((n, n))
    inv_tau = 1.0 / params.tau
    return sp.bmat(
        [
            [z, z, z, -dm],
            [z, z, dm, z],
            [z, inv_tau * dp, z, -inv_tau * eye],
            [-inv_tau * dp, z, eye * inv_tau, z],
        ],
        format="csr",
    )


def hyp_implicit_stage_solve(params: HypParams, coeff: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (I - coeff * L) y = rhs with L the stiff linear operator."""
    if coeff == 0.0:
        return rhs.copy()
    key = ("hyp", float(coeff))
    solver = params._solver_cache.get(key)
    if solver is None:
        linear = params._solver_cache.setdefault("linear", _linear_blocks(params))
        system = (sp.identity(4 * params.n, format="csr") - coeff * linear).tocsc()
        try:
            solver = splu(system)
        except RuntimeError as exc:
            raise ArithmeticError(f"implicit stage system singular: {exc}") from exc
        params._solver_cache[key] = solver
    sol = solver.solve(rhs)
    if not np.all(np.isfinite(sol)):
        raise ArithmeticError("implicit stage solve produced non-finite values")
    return sol


def project_mass_ellipsoid(params: HypParams):
    """Projection onto the mass ellipsoid.

    The physical pair (v, w) is scaled by 1 + s and the auxiliary pair
    (nu, omega) by 1 + tau*s, where s is the root of

        (q + p tau^3) s^2 + 2 (q + p tau^2) s + (q + p tau - c) = 0

    closest to zero (q and p are the physical and auxiliary quadratic
    forms, c the target mass).  The differentiated scaling keeps the
    auxiliary fields within O(tau) of the slow manifold.
    """
    tau = params.tau
    m = params.ops.mass_diag
    n = params.n

    def project(y: np.ndarray, target: float) -> np.ndarray:
        v, w, nu, om = (y[k * n : (k + 1) * n] for k in range(4))
        q = float(m @ v**2 + m @ w**2)
        p = float(m @ nu**2 + m @ om**2)
        a = q + p * tau**3
        b = q + p * tau**2
        c0 = q + p * tau - target
        disc = b * b - a * c0
        if disc < 0.0:
            raise ProjectionFailure(
                "mass ellipsoid projection has no real solution "
                f"(discriminant {disc:.3e})"
            )
        if a <= 0.0:
            raise ProjectionFailure("cannot project the zero state onto a mass ellipsoid")
        s = (-b + np.sqrt(disc)) / a
        out = y.copy()
        out[: 2 * n] *= 1.0 + s
        out[2 * n :] *= 1.0 + tau * s
        return out

    return project


def hyp_split_ode(params: HypParams) -> SplitOde:
    """Flat-array adapter: stiff linear part implicit, cubic part explicit."""
    n = params.n

    def full(y):
        return hyp_rhs(params, HypState.from_array(y)).to_array()

    def linear(y):
        s = HypState.from_array(y)
        dp, dm = params.ops.d_plus, params.ops.d_minus
        return np.concatenate(
            [
                -dm(s.omega),
                dm(s.nu),
                (dp(s.w) - s.omega) / params.tau,
                (-dp(s.v) + s.nu) / params.tau,
            ]
        )

    def nonlinear(y):
        v, w = y[:n], y[n : 2 * n]
        cubic = params.beta * (v**2 + w**2)
        out = np.zeros_like(y)
        out[:n] = -cubic * w
        out[n : 2 * n] = cubic * v
        return out

    def solve(coeff, y):
        return hyp_implicit_stage_solve(params, coeff, y)

    return SplitOde(
        dimension=4 * n,
        full_rhs=full,
        linear_rhs=linear,
        nonlinear_rhs=nonlinear,
        implicit_solve=solve,
    )
