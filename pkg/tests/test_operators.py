import numpy as np
import pytest

from nlsrelax import operators as op


def all_operator_sets():
    sets = []
    for n in (64, 65):
        sets.append(op.make_fourier(n, -1.0, 2.0))
    for order in (2, 4, 6, 8):
        sets.append(op.make_central_fd(order, 50, -3.0, 3.0))
    for order in (2, 4, 6):
        sets.append(op.make_bounded_fd_sbp(order, 50, -3.0, 3.0))
        sets.append(op.make_upwind_fd(order, 50, -3.0, 3.0))
    return sets


@pytest.mark.parametrize("ops", all_operator_sets(), ids=lambda o: f"{o.kind}-{o.accuracy_order}")
def test_conformance_battery(ops):
    report = op.sbp_conformance(ops, seed=42)
    assert report.max_identity_residual() <= 1e-12
    assert report.a2_min_quadratic_form >= -1e-12


def test_grid_periodic_excludes_right_endpoint():
    grid = op.make_grid(0.0, 1.0, 10, periodic=True)
    assert grid.dx == pytest.approx(0.1)
    assert grid.nodes[-1] == pytest.approx(0.9)
    bounded = op.make_grid(0.0, 1.0, 11, periodic=False)
    assert bounded.nodes[0] == 0.0 and bounded.nodes[-1] == 1.0


def test_order2_bounded_matches_fem_matrices():
    # On [0, 4] with dx = 1 the order-2 pair must be the classical P1
    # finite-element lumped mass and stiffness matrices.
    ops = op.make_bounded_fd_sbp(2, 5, 0.0, 4.0)
    assert np.array_equal(ops.mass_diag, np.array([0.5, 1.0, 1.0, 1.0, 0.5]))
    stiffness = np.diag(np.full(4, -1.0), 1) + np.diag(np.full(4, -1.0), -1)
    stiffness += np.diag([1.0, 2.0, 2.0, 2.0, 1.0])
    assert np.array_equal(ops.a2.to_dense(), stiffness)


@pytest.mark.parametrize("n,should_match", [(64, False), (65, True)])
def test_fourier_d2_equals_d1_squared_iff_odd(n, should_match):
    ops = op.make_fourier(n, -1.0, 1.0)
    rng = np.random.default_rng(0)
    z = rng.standard_normal(n)
    diff = np.max(np.abs(ops.d2(z) - ops.d1(ops.d1(z))))
    if should_match:
        assert diff <= 1e-10 * np.max(np.abs(ops.d2(z)))
    else:
        assert diff > 1.0


def test_fourier_differentiates_trig_exactly():
    ops = op.make_fourier(32, 0.0, 2.0 * np.pi)
    x = ops.grid.nodes
    np.testing.assert_allclose(ops.d1(np.sin(3 * x)), 3 * np.cos(3 * x), atol=1e-12)
    np.testing.assert_allclose(ops.d2(np.cos(2 * x)), -4 * np.cos(2 * x), atol=1e-12)


@pytest.mark.parametrize("order", [2, 4, 6, 8])
def test_central_fd_convergence(order):
    errors = []
    for n in (40, 80):
        ops = op.make_central_fd(order, n, 0.0, 2.0 * np.pi)
        x = ops.grid.nodes
        errors.append(np.max(np.abs(ops.d1(np.sin(x)) - np.cos(x))))
    rate = np.log2(errors[0] / errors[1])
    assert rate > order - 0.3


@pytest.mark.parametrize("order", [2, 4, 6])
def test_upwind_product_is_consistent_second_derivative(order):
    errors = []
    for n in (50, 100):
        ops = op.make_upwind_fd(order, n, 0.0, 2.0 * np.pi)
        x = ops.grid.nodes
        errors.append(np.max(np.abs(ops.d2(np.sin(x)) + np.sin(x))))
    rate = np.log2(errors[0] / errors[1])
    assert rate > order - 0.3


def test_upwind_dissipation_sign():
    ops = op.make_upwind_fd(4, 40, -1.0, 1.0)
    m = np.diag(ops.mass_diag)
    s = m @ (ops.d_plus.to_dense() - ops.d_minus.to_dense())
    s = 0.5 * (s + s.T)
    assert np.max(np.linalg.eigvalsh(s)) <= 1e-12


def test_bounded_d2_identity():
    # M D2 = tR dR^T - tL dL^T - A2 as dense matrices.
    for order in (2, 4, 6):
        ops = op.make_bounded_fd_sbp(order, 30, 0.0, 1.0)
        lhs = np.diag(ops.mass_diag) @ ops.d2.to_dense()
        rhs = (
            np.outer(ops.t_right, ops.d_right)
            - np.outer(ops.t_left, ops.d_left)
            - ops.a2.to_dense()
        )
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_invalid_inputs_raise():
    with pytest.raises(op.OperatorConstructionError):
        op.make_central_fd(3, 20, 0.0, 1.0)
    with pytest.raises(op.OperatorConstructionError):
        op.make_bounded_fd_sbp(4, 5, 0.0, 1.0)  # too few nodes for closures
    with pytest.raises(op.OperatorConstructionError):
        op.make_fourier(1, 0.0, 1.0)
    with pytest.raises(op.OperatorConstructionError):
        op.make_grid(1.0, 0.0, 8, periodic=True)
