import numpy as np
import pytest

from nlsrelax import nls
from nlsrelax import operators as op
from nlsrelax import relaxation as rx
from nlsrelax.integrators import integrate
from nlsrelax.tableaux import get_tableau


def test_solve_gamma_simple_root():
    gamma = rx.solve_gamma(lambda g: g**2 - 1.1025)
    assert gamma == pytest.approx(1.05, abs=1e-12)


def test_solve_gamma_fast_path():
    assert rx.solve_gamma(lambda g: 0.0) == 1.0


def test_solve_gamma_expands_bracket():
    # root at 1.5, outside the initial bracket of width 0.1
    gamma = rx.solve_gamma(lambda g: g - 1.5)
    assert gamma == pytest.approx(1.5, abs=1e-12)


def test_solve_gamma_no_root():
    with pytest.raises(rx.RelaxationFailure, match="no sign change"):
        rx.solve_gamma(lambda g: 1.0 + g**2)


def test_project_mass_sphere():
    mass_diag = np.array([0.5, 1.0, 0.5])
    project = rx.project_mass_sphere(mass_diag, n_fields=2)
    rng = np.random.default_rng(3)
    y = rng.standard_normal(6)
    target = 2.7
    out = project(y, target)
    achieved = mass_diag @ out[:3] ** 2 + mass_diag @ out[3:] ** 2
    assert achieved == pytest.approx(target, rel=1e-14)
    # scaling preserves direction
    assert np.allclose(np.cross(out[:3], y[:3]), 0.0, atol=1e-12)


def test_project_mass_sphere_rejects_zero():
    project = rx.project_mass_sphere(np.ones(2))
    with pytest.raises(rx.RelaxationFailure):
        project(np.zeros(4), 1.0)


def _soliton_setup(n=128):
    ops = op.make_fourier(n, -20.0, 20.0)
    params = nls.NlsParams(beta=2.0, ops=ops)
    x = ops.grid.nodes
    u0 = 1.0 / np.cosh(x) * np.exp(-2j * x)
    y0 = nls.NlsState.from_complex(u0).to_array()
    inv = rx.InvariantPair(
        energy=lambda y: nls.energy(params, nls.NlsState(y[:n], y[n:])),
        mass=lambda y: nls.mass(params, nls.NlsState(y[:n], y[n:])),
        project_mass=rx.project_mass_sphere(ops.mass_diag, 2),
    )
    return params, nls.nls_split_ode(params), y0, inv


def test_quadratic_preserving_step_conserves_both_invariants():
    params, ode, y0, inv = _soliton_setup()
    step = rx.quadratic_preserving_step(inv)
    y, record = integrate(
        ode, get_tableau("ars343"), y0, (0.0, 0.5), 0.01, step=step,
        functionals={"mass": inv.mass, "energy": inv.energy},
    )
    masses = record.functional_array("mass")
    energies = record.functional_array("energy")
    assert np.max(np.abs(masses - masses[0])) < 1e-12
    assert np.max(np.abs(energies - energies[0])) < 1e-11
    gammas = np.asarray(record.gammas)
    assert np.max(np.abs(gammas - 1.0)) < 0.05


def test_standard_relaxation_conserves_energy_only():
    params, ode, y0, inv = _soliton_setup()
    step = rx.standard_relaxation_step(inv)
    y, record = integrate(
        ode, get_tableau("ars343"), y0, (0.0, 0.5), 0.01, step=step,
        functionals={"mass": inv.mass, "energy": inv.energy},
    )
    energies = record.functional_array("energy")
    assert np.max(np.abs(energies - energies[0])) < 1e-11


def test_relaxed_time_accounting():
    # accepted step sizes are gamma * dt and the run still ends at t_end
    params, ode, y0, inv = _soliton_setup(n=64)
    step = rx.quadratic_preserving_step(inv)
    y, record = integrate(ode, get_tableau("kc43"), y0, (0.0, 0.3), 0.01, step=step)
    times = np.asarray(record.times)
    gammas = np.asarray(record.gammas)
    interior = slice(0, len(gammas) - 1)
    np.testing.assert_allclose(
        np.diff(times)[interior], 0.01 * gammas[interior], rtol=1e-12
    )
    assert times[-1] == pytest.approx(0.3, abs=1e-11)


def test_degenerate_direction_raises():
    params, ode, y0, inv = _soliton_setup(n=64)
    step = rx.quadratic_preserving_step(inv)
    frozen = SplitOdeZero(ode)
    with pytest.raises(rx.RelaxationFailure, match="degenerate"):
        step(frozen, get_tableau("rk4"), y0, 0.0, 0.01)


class SplitOdeZero:
    """Wrap an ode so every right-hand side vanishes."""

    def __init__(self, ode):
        self.dimension = ode.dimension
        self.full_rhs = lambda y: np.zeros_like(y)
        self.linear_rhs = lambda y: np.zeros_like(y)
        self.nonlinear_rhs = lambda y: np.zeros_like(y)
        self.implicit_solve = lambda c, y: y.copy()

    def supports_imex(self):
        return True
