"""Tests for the input map, the Gramian and the minimum-norm control"""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from utils.control import (
    ControllabilityContext,
    ControlSignal,
    MatrixOperator,
    MultiplicationOperator,
    assemble_gramian,
    k_identity_check,
    kernel_projection,
    min_norm_control,
    reachability_apply,
)
from utils.dynamics import TimeGrid, mild_solve
from utils.errors import KinkProximity, NotControllable, OffGridTime
from utils.semigroup import SemigroupHandle
from utils.space import GridFunction, midpoints


def _shift_context(n=32, T=1.25, m=None):
    grid = TimeGrid.aligned(T, n)
    B = MultiplicationOperator(np.ones(n) if m is None else m)
    return ControllabilityContext(SemigroupHandle.shift(), B, grid)


# ------------------------------------------------------------------------------
# Input map
# ------------------------------------------------------------------------------


def test_reachability_of_zero_control():
    """W0 = 0"""
    grid = TimeGrid.aligned(1.0, 16)
    u = ControlSignal.zeros(grid, 16)
    B = MultiplicationOperator(np.ones(16))
    assert_array_equal(reachability_apply(SemigroupHandle.shift(), B, u, 1.0).values, np.zeros(16))


def test_reachability_of_constant_control():
    """u = c over [0, 1] reaches c (1 - xi)"""
    n = 32
    grid = TimeGrid.aligned(1.0, n)
    u = ControlSignal.constant(grid, np.full(n, 1.5))
    B = MultiplicationOperator(np.ones(n))
    y = reachability_apply(SemigroupHandle.shift(), B, u, 1.0)
    assert_allclose(y.values, 1.5 * (1.0 - midpoints(n)), atol=grid.dt)


def test_reachability_is_the_mild_solution():
    """W u is the mild solution from 0 without nonlinearity"""
    n = 16
    grid = TimeGrid.aligned(1.25, n)
    u = ControlSignal(grid, np.random.default_rng(11).standard_normal((grid.nt + 1, n)))
    B = MultiplicationOperator(np.linspace(0.5, 1.5, n))
    S = SemigroupHandle.shift()
    z = mild_solve(S, B, None, u, grid, GridFunction.zeros(n))
    assert_array_equal(reachability_apply(S, B, u, 1.25).values, z.final.values)


# ------------------------------------------------------------------------------
# Gramian
# ------------------------------------------------------------------------------


def test_gramian_without_dynamics():
    """Q = I and B = I over [0, 1] give the identity"""
    grid = TimeGrid(1.0, 10)
    G = assemble_gramian(SemigroupHandle.dense(np.zeros((5, 5))), MatrixOperator.identity(5), 1.0, grid)
    assert_allclose(G.matrix, np.eye(5), atol=1e-12)
    assert_allclose(G.cond_estimate, 1.0, rtol=1e-10)
    assert G.rank == 5


def test_gramian_of_the_shift_is_diagonal():
    """G_ii = min(T, 1 - xi_i), nothing off the diagonal"""
    n = 16
    grid = TimeGrid.aligned(1.25, n)
    G = assemble_gramian(SemigroupHandle.shift(), MultiplicationOperator(np.ones(n)), 1.25, grid)
    assert np.abs(np.diag(G.matrix) - np.minimum(1.25, 1.0 - midpoints(n))).max() <= 3 * grid.dt
    assert np.abs(G.matrix - np.diag(np.diag(G.matrix))).max() <= 3 * grid.dt
    assert G.diagnostics()["n"] == n


def test_gramian_is_symmetric_and_semidefinite():
    """Symmetric to 1e-12 with no eigenvalue below -1e-12"""
    rng = np.random.default_rng(2)
    S = SemigroupHandle.dense(rng.standard_normal((8, 8)) / 2)
    B = MatrixOperator(rng.standard_normal((8, 8)))
    G = assemble_gramian(S, B, 1.0, TimeGrid(1.0, 25))
    assert np.abs(G.matrix - G.matrix.T).max() <= 1e-12
    assert G.min_eig >= -1e-12


def test_gramian_assembly_routes_agree():
    """Adjoint applications and transposed matrices give the same Gramian"""
    rng = np.random.default_rng(3)
    S = SemigroupHandle.dense(rng.standard_normal((6, 6)) / 2)
    B = MatrixOperator(rng.standard_normal((6, 6)))
    grid = TimeGrid(1.0, 20)
    adjoint = assemble_gramian(S, B, 1.0, grid, method="adjoint")
    transpose = assemble_gramian(S, B, 1.0, grid, method="transpose")
    assert_allclose(adjoint.matrix, transpose.matrix, atol=1e-12)

    shift = SemigroupHandle.shift()
    m = MultiplicationOperator(np.linspace(0.5, 1.0, 16))
    grid = TimeGrid.aligned(1.25, 16)
    assert_allclose(
        assemble_gramian(shift, m, 1.25, grid).matrix,
        assemble_gramian(shift, m, 1.25, grid, method="transpose").matrix,
        atol=1e-12,
    )


def test_vanishing_control_cell_is_not_controllable():
    """A cell with m = 0 makes the Gramian singular"""
    m = np.ones(16)
    m[5] = 0.0
    with pytest.raises(NotControllable) as error:
        _shift_context(16, m=m)
    assert error.value.payload["T"] == 1.25


# ------------------------------------------------------------------------------
# Minimum-norm control
# ------------------------------------------------------------------------------


def test_min_norm_control_of_zero():
    """y = 0 needs no control"""
    n = 16
    grid = TimeGrid.aligned(1.25, n)
    u = min_norm_control(
        SemigroupHandle.shift(), MultiplicationOperator(np.ones(n)), 1.25, GridFunction.zeros(n), grid
    )
    assert_array_equal(u.inputs, np.zeros((grid.nt + 1, n)))


def test_min_norm_control_without_dynamics():
    """Q = I and B = I over [0, 1] give the constant control y"""
    y = np.array([1.0, -2.0, 0.5, 3.0])
    grid = TimeGrid(1.0, 10)
    u = min_norm_control(SemigroupHandle.dense(np.zeros((4, 4))), MatrixOperator.identity(4), 1.0, y, grid)
    assert_allclose(u.inputs, np.tile(y, (11, 1)), atol=1e-12)


def test_min_norm_control_reconstructs_the_target():
    """W W^-1 y = y for a sine target on 64 cells"""
    n = 64
    context = _shift_context(n)
    y = GridFunction.sample(lambda xi: np.sin(np.pi * xi), n)
    u = context.inverse(y)
    assert (context.forward(u) - y).norm() <= 1e-8 * (1 + y.norm())


def test_exact_linear_controllability_on_random_targets():
    """Relative reconstruction error stays below 1e-8"""
    rng = np.random.default_rng(30)
    n = 32
    context = _shift_context(n, m=rng.uniform(0.5, 1.5, n))
    for _ in range(20):
        y = GridFunction(rng.standard_normal(n))
        assert (context.forward(context.inverse(y)) - y).norm() / y.norm() <= 1e-8


def test_min_norm_control_is_minimal():
    """Adding any kernel component does not lower the energy"""
    rng = np.random.default_rng(31)
    n = 16
    context = _shift_context(n)
    y = GridFunction(rng.standard_normal(n))
    u = context.inverse(y)
    for _ in range(5):
        noise = ControlSignal(context.grid, rng.standard_normal((context.grid.nt + 1, n)))
        v = u + kernel_projection(context, noise)
        assert (context.forward(v) - y).norm() <= 1e-8 * (1 + y.norm())
        assert u.norm() <= v.norm() + 1e-8


# ------------------------------------------------------------------------------
# k identity
# ------------------------------------------------------------------------------


def test_k_identity_of_zero():
    """x = 0 has no defect"""
    context = _shift_context(32)
    S, B = context.S, context.B
    assert k_identity_check(S, B, context, GridFunction.zeros(32), 0.5, 1 / 32) == 0.0


def test_k_identity_without_dynamics():
    """Constant controls make both sides equal y"""
    S = SemigroupHandle.dense(np.zeros((4, 4)))
    B = MatrixOperator.identity(4)
    context = ControllabilityContext(S, B, TimeGrid(1.0, 20))
    x = GridFunction([1.0, 0.5, -1.0, 2.0])
    assert k_identity_check(S, B, context, x, 0.5, 0.05) <= 1e-9


def test_k_identity_under_the_shift():
    """Away from kinks the defect is O(hstep)"""
    n = 64
    context = _shift_context(n)
    x = GridFunction.sample(lambda xi: np.sin(2 * np.pi * xi), n)
    defect = k_identity_check(context.S, context.B, context, x, 0.5, 1 / n)
    assert defect <= 10 * (1 / n) * x.norm()


def test_k_identity_refuses_kinks_and_off_grid_steps():
    """Kink neighbourhoods and fractional steps are refused"""
    n = 64
    context = _shift_context(n)
    x = GridFunction.sample(lambda xi: np.sin(2 * np.pi * xi), n)
    assert context.kink_times(x) == [pytest.approx(17 / 64)]
    with pytest.raises(KinkProximity):
        k_identity_check(context.S, context.B, context, x, 17 / 64, 1 / n)
    with pytest.raises(OffGridTime):
        k_identity_check(context.S, context.B, context, x, 0.5, 1.5 / n)
