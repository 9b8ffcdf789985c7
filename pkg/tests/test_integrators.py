import numpy as np
import pytest

from nlsrelax.integrators import SplitOde, erk_step, imex_step, integrate, rk_step
from nlsrelax.tableaux import get_tableau


def harmonic_oscillator(omega=3.0, kick=0.2):
    """x'' + omega^2 x = kick*x^3 treated as linear implicit + cubic explicit."""

    def linear(y):
        return np.array([y[1], -(omega**2) * y[0]])

    def nonlinear(y):
        return np.array([0.0, kick * y[0] ** 3])

    def full(y):
        return linear(y) + nonlinear(y)

    def solve(c, rhs):
        # (I - c*L) y = rhs with L = [[0,1],[-omega^2,0]]
        det = 1.0 + (c * omega) ** 2
        return np.array(
            [(rhs[0] + c * rhs[1]) / det, (rhs[1] - c * omega**2 * rhs[0]) / det]
        )

    return SplitOde(2, full, linear, nonlinear, solve)


@pytest.mark.parametrize("name", ["rk4", "ars343", "kc43", "kc54"])
def test_step_convergence(name):
    ode = harmonic_oscillator()
    tab = get_tableau(name)
    y0 = np.array([1.0, 0.0])
    y_ref, _ = integrate(ode, get_tableau("kc54"), y0, (0.0, 1.0), 1e-4)
    errors = []
    for dt in (0.02, 0.01):
        y, _ = integrate(ode, tab, y0, (0.0, 1.0), dt)
        errors.append(np.max(np.abs(y - y_ref)))
    rate = np.log2(errors[0] / errors[1])
    assert rate > tab.order - 0.4


def test_explicit_dispatch_matches_erk():
    ode = harmonic_oscillator()
    tab = get_tableau("rk4")
    y = np.array([0.3, -0.7])
    np.testing.assert_array_equal(rk_step(ode, tab, y, 0.01), erk_step(ode, tab, y, 0.01))


def test_imex_requires_splitting():
    ode = SplitOde(2, lambda y: -y)
    with pytest.raises(ValueError, match="splitting"):
        imex_step(ode, get_tableau("ars343"), np.ones(2), 0.1)


def test_integrate_lands_on_t_end():
    ode = harmonic_oscillator()
    # dt does not divide the interval
    y, record = integrate(ode, get_tableau("kc43"), np.array([1.0, 0.0]), (0.0, 0.77), 0.1)
    assert record.times[-1] == pytest.approx(0.77, abs=1e-12)
    assert record.steps == len(record.gammas)
    assert np.all(np.diff(record.times) > 0)


def test_integrate_records_functionals_and_snapshots():
    ode = harmonic_oscillator(kick=0.0)
    energy = lambda y: y[1] ** 2 + 9.0 * y[0] ** 2
    y, record = integrate(
        ode,
        get_tableau("kc54"),
        np.array([1.0, 0.0]),
        (0.0, 1.0),
        0.01,
        functionals={"energy": energy},
        snapshot_times=np.array([0.5, 1.0]),
    )
    values = record.functional_array("energy")
    assert values.size == len(record.times)
    assert np.max(np.abs(values - values[0])) < 1e-8
    assert len(record.snapshots) == 2
    assert record.snapshots[0][0] == pytest.approx(0.5, abs=0.005)


def test_integrate_rejects_bad_dt():
    ode = harmonic_oscillator()
    with pytest.raises(ValueError):
        integrate(ode, get_tableau("rk4"), np.array([1.0, 0.0]), (0.0, 1.0), -0.1)


def test_non_finite_detected():
    blowup = SplitOde(1, lambda y: y**2)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(ArithmeticError, match="non-finite"):
            integrate(blowup, get_tableau("rk4"), np.array([1.0]), (0.0, 50.0), 0.5)
