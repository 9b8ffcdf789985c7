import numpy as np
import pytest

from nlsrelax import hyperbolic as hyp
from nlsrelax import nls
from nlsrelax import operators as op


@pytest.fixture
def params():
    ops = op.make_upwind_fd(4, 96, -8.0, 8.0)
    return hyp.HypParams(beta=2.0, tau=1e-3, ops=ops)


@pytest.fixture
def state(params):
    rng = np.random.default_rng(11)
    n = params.n
    return hyp.well_prepared_init(params, rng.standard_normal(n), rng.standard_normal(n))


def test_requires_upwind_operators():
    ops = op.make_fourier(32, -1.0, 1.0)
    with pytest.raises(ValueError, match="upwind"):
        hyp.HypParams(beta=1.0, tau=0.1, ops=ops)
    with pytest.raises(ValueError, match="tau"):
        hyp.HypParams(beta=1.0, tau=0.0, ops=op.make_upwind_fd(2, 16, 0.0, 1.0))


def test_well_prepared_auxiliaries(params, state):
    np.testing.assert_array_equal(state.nu, params.ops.d_plus(state.v))
    np.testing.assert_array_equal(state.omega, params.ops.d_plus(state.w))


def test_mass_directional_derivative_vanishes(params, state):
    r = hyp.hyp_rhs(params, state)
    m = params.ops.mass_diag
    dmass = 2.0 * float(m @ (state.v * r.v) + m @ (state.w * r.w))
    dmass += 2.0 * params.tau * float(m @ (state.nu * r.nu) + m @ (state.omega * r.omega))
    assert abs(dmass) <= 1e-11 * hyp.hyp_mass(params, state)


def test_energy_directional_derivative_vanishes(params, state):
    r = hyp.hyp_rhs(params, state)
    m = params.ops.mass_diag
    dp = params.ops.d_plus
    dp_t = dp.to_dense().T
    cubic = 2.0 * params.beta * (state.v**2 + state.w**2)
    grad_v = 2.0 * dp_t @ (m * state.nu) - cubic * state.v * m
    grad_w = 2.0 * dp_t @ (m * state.omega) - cubic * state.w * m
    grad_nu = 2.0 * m * dp(state.v) - 2.0 * m * state.nu
    grad_om = 2.0 * m * dp(state.w) - 2.0 * m * state.omega
    denergy = float(grad_v @ r.v + grad_w @ r.w + grad_nu @ r.nu + grad_om @ r.omega)
    assert abs(denergy) <= 1e-9 * max(abs(hyp.hyp_energy(params, state)), 1.0)


def test_rhs_matches_limit_on_slow_manifold(params, state):
    # well-prepared data: the (v, w) equations coincide with the limit
    # system built on D2 = D- D+
    limit = nls.NlsParams(beta=params.beta, ops=params.ops)
    r_hyp = hyp.hyp_rhs(params, state)
    r_nls = nls.nls_rhs(limit, nls.NlsState(state.v, state.w))
    np.testing.assert_allclose(r_hyp.v, r_nls.v, atol=1e-11)
    np.testing.assert_allclose(r_hyp.w, r_nls.w, atol=1e-11)


def test_implicit_stage_solve(params, state):
    ode = hyp.hyp_split_ode(params)
    rng = np.random.default_rng(0)
    rhs = rng.standard_normal(4 * params.n)
    coeff = 0.21
    sol = ode.implicit_solve(coeff, rhs)
    residual = sol - coeff * ode.linear_rhs(sol) - rhs
    assert np.max(np.abs(residual)) < 1e-10
    np.testing.assert_array_equal(ode.implicit_solve(0.0, rhs), rhs)


def test_split_sums_to_full(params, state):
    ode = hyp.hyp_split_ode(params)
    y = state.to_array()
    np.testing.assert_allclose(
        ode.linear_rhs(y) + ode.nonlinear_rhs(y), ode.full_rhs(y), atol=1e-12
    )


def test_ellipsoid_projection_reaches_target(params, state):
    project = hyp.project_mass_ellipsoid(params)
    y = state.to_array()
    target = 1.07 * hyp.hyp_mass(params, state)
    out = project(y, target)
    achieved = hyp.hyp_mass(params, hyp.HypState.from_array(out))
    assert achieved == pytest.approx(target, rel=1e-13)
    # physical and auxiliary blocks are scaled by different factors
    n = params.n
    alpha1 = out[0] / y[0]
    alpha2 = out[2 * n] / y[2 * n]
    np.testing.assert_allclose(out[: 2 * n], alpha1 * y[: 2 * n], rtol=1e-12)
    np.testing.assert_allclose(out[2 * n :], alpha2 * y[2 * n :], rtol=1e-12)
    assert abs(alpha2 - 1.0) < abs(alpha1 - 1.0)


def test_ellipsoid_projection_failure_modes(params):
    project = hyp.project_mass_ellipsoid(params)
    with pytest.raises(hyp.ProjectionFailure):
        project(np.zeros(4 * params.n), 1.0)


def test_state_round_trip():
    s = hyp.HypState(np.ones(3), np.zeros(3), np.full(3, 2.0), np.full(3, -1.0))
    back = hyp.HypState.from_array(s.to_array())
    np.testing.assert_array_equal(back.omega, s.omega)
    np.testing.assert_array_equal(s.to_complex(), np.ones(3) + 0j)
