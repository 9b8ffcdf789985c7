"""One-step time integration for additively split ordinary differential
equations.

The integrators operate on flat real arrays.  A problem is described by
a :class:`SplitOde` bundling the full right-hand side, its stiff/non-stiff
splitting, and a solver for the shifted linear stage systems
(I - coeff*L) y = rhs.  Purely explicit tableaux ignore the splitting and
use the full right-hand side, so the same driver serves both families.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .tableaux import ImexTableau


@dataclass
class SplitOde:
    dimension: int
    full_rhs: Callable[[np.ndarray], np.ndarray]
    linear_rhs: Optional[Callable[[np.ndarray], np.ndarray]] = None
    nonlinear_rhs: Optional[Callable[[np.ndarray], np.ndarray]] = None
    implicit_solve: Optional[Callable[[float, np.ndarray], np.ndarray]] = None

    def supports_imex(self) -> bool:
        return (
            self.linear_rhs is not None
            and self.nonlinear_rhs is not None
            and self.implicit_solve is not None
        )


def erk_step(ode: SplitOde, tableau: ImexTableau, y: np.ndarray, dt: float) -> np.ndarray:
    """One explicit Runge-Kutta step using the full right-hand side."""
    a = tableau.a_explicit
    s = tableau.stages
    k = np.empty((s, y.size))
    for i in range(s):
        stage = y if i == 0 else y + dt * (a[i, :i].T @ k[:i])
        k[i] = ode.full_rhs(stage)
    return y + dt * (tableau.b_explicit @ k)


def imex_step(ode: SplitOde, tableau: ImexTableau, y: np.ndarray, dt: float) -> np.ndarray:
    """One additive Runge-Kutta step: implicit tableau on the linear part,
    explicit tableau on the nonlinear part."""
    if not ode.supports_imex():
        raise ValueError("ode does not provide the splitting required for IMEX stepping")
    a_im = tableau.a_implicit
    a_ex = tableau.a_explicit
    s = tableau.stages
    f_lin = np.empty((s, y.size))
    f_non = np.empty((s, y.size))
    for i in range(s):
        rhs = y.copy()
        if i > 0:
            rhs += dt * (a_ex[i, :i].T @ f_non[:i] + a_im[i, :i].T @ f_lin[:i])
        diag = dt * a_im[i, i]
        stage = ode.implicit_solve(diag, rhs) if diag != 0.0 else rhs
        f_lin[i] = ode.linear_rhs(stage)
        f_non[i] = ode.nonlinear_rhs(stage)
    return y + dt * (tableau.b @ f_lin + tableau.b_explicit @ f_non)


def rk_step(ode: SplitOde, tableau: ImexTableau, y: np.ndarray, dt: float) -> np.ndarray:
    """Dispatch to the explicit or IMEX stepper based on the tableau."""
    if tableau.is_explicit:
        return erk_step(ode, tableau, y, dt)
    return imex_step(ode, tableau, y, dt)


# A step transformer receives (ode, tableau, y, t, dt) and returns the new
# state together with the time increment actually taken (relaxation methods
# rescale dt by a step-dependent factor gamma).
StepFunction = Callable[[SplitOde, ImexTableau, np.ndarray, float, float], tuple[np.ndarray, float, float]]


def plain_step(ode, tableau, y, t, dt):
    return rk_step(ode, tableau, y, dt), dt, 1.0


@dataclass
class RunRecord:
    """Per-step diagnostics collected during a run."""

    times: list[float] = field(default_factory=list)
    gammas: list[float] = field(default_factory=list)
    functionals: dict[str, list[float]] = field(default_factory=dict)
    snapshots: list[tuple[float, np.ndarray]] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    def functional_array(self, name: str) -> np.ndarray:
        return np.asarray(self.functionals[name])


def integrate(
    ode: SplitOde,
    tableau: ImexTableau,
    y0: np.ndarray,
    t_span: tuple[float, float],
    dt: float,
    step: StepFunction = plain_step,
    functionals: Optional[dict[str, Callable[[np.ndarray], float]]] = None,
    snapshot_times: Optional[np.ndarray] = None,
    max_steps: int = 50_000_000,
) -> tuple[np.ndarray, RunRecord]:
    """Advance y0 from t_span[0] to t_span[1] with nominal step size dt.

    Relaxation steppers shorten or lengthen individual steps; near the
    final time the nominal step is capped by the remaining gap and the
    capped step is repeated, so the run lands on t_end up to round-off.
    Snapshot times are matched to the nearest completed step.
    """
    t0, t_end = t_span
    if dt <= 0:
        raise ValueError("dt must be positive")
    functionals = functionals or {}
    record = RunRecord(functionals={name: [] for name in functionals})
    pending = sorted(float(ts) for ts in snapshot_times) if snapshot_times is not None else []

    y = np.array(y0, dtype=float, copy=True)
    t = t0

    def observe(t, y):
        record.times.append(t)
        for name, fn in functionals.items():
            record.functionals[name].append(fn(y))
        while pending and t >= pending[0] - 0.5 * dt:
            record.snapshots.append((t, y.copy()))
            pending.pop(0)

    observe(t, y)
    eps = 1e-12 * max(abs(t_end), 1.0)
    for _ in range(max_steps):
        if t >= t_end - eps:
            break
        gap = t_end - t
        if gap <= dt * (1.0 + 1e-8):
            # Final step: find the nominal size h whose relaxed sweep
            # gamma*h covers the remaining gap, so the run lands on t_end
            # without giving up conservation.  For plain steps gamma = 1
            # and the first iterate is already exact.
            h = gap
            for _ in range(8):
                y_new, dt_taken, gamma = step(ode, tableau, y, t, h)
                if abs(dt_taken - gap) <= eps:
                    break
                h = gap / gamma
            y = y_new
            t += dt_taken
            record.gammas.append(gamma)
        else:
            y, dt_taken, gamma = step(ode, tableau, y, t, dt)
            t += dt_taken
            record.gammas.append(gamma)
        if not np.all(np.isfinite(y)):
            raise ArithmeticError(f"solution became non-finite at t = {t:.6g}")
        observe(t, y)
    else:
        raise ArithmeticError("integration exceeded the maximum number of steps")
    return y, record
