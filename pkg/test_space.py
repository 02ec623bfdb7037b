"""Tests for the discrete L2(0,1) space and the isometry with l2"""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from utils.errors import DimensionMismatch
from utils.space import GridFunction, SeqVector, midpoints, p_forward, p_inverse


def test_zero_maps_to_zero():
    """P and its inverse send zero to zero"""
    assert_array_equal(p_forward(GridFunction.zeros(8)).coeffs, np.zeros(8))
    assert_array_equal(p_inverse(SeqVector(np.zeros(8))).values, np.zeros(8))


def test_hand_computed_coordinates():
    """(2, 0, 0, 0) on four cells has coordinates (1, 0, 0, 0)"""
    x = GridFunction([2.0, 0.0, 0.0, 0.0])
    assert_allclose(p_forward(x).coeffs, [1.0, 0.0, 0.0, 0.0], atol=1e-15)
    assert_allclose(p_inverse(SeqVector([1.0, 0.0, 0.0, 0.0])).values, [2.0, 0.0, 0.0, 0.0])


def test_isometry_and_round_trip():
    """P preserves norms and inner products and inverts exactly"""
    rng = np.random.default_rng(42)
    x = GridFunction(rng.standard_normal(64))
    y = GridFunction(rng.standard_normal(64))
    assert abs(p_forward(x).norm() - x.norm()) <= 1e-12 * (1 + x.norm())
    assert abs(p_forward(x).inner(p_forward(y)) - x.inner(y)) <= 1e-12 * (1 + x.norm() * y.norm())

    z = GridFunction(np.random.default_rng(7).standard_normal(64))
    assert np.abs(p_inverse(p_forward(z)).values - z.values).max() <= 1e-14


def test_linearity():
    """P(ax + by) = aP(x) + bP(y)"""
    rng = np.random.default_rng(3)
    x, y = GridFunction(rng.standard_normal(32)), GridFunction(rng.standard_normal(32))
    lhs = p_forward(2.5 * x - 0.5 * y).coeffs
    rhs = 2.5 * p_forward(x).coeffs - 0.5 * p_forward(y).coeffs
    assert_allclose(lhs, rhs, atol=1e-12)


def test_norm_uses_cell_width():
    """||1|| = 1 on any grid"""
    for n in (8, 64, 1000):
        assert_allclose(GridFunction(np.ones(n)).norm(), 1.0, rtol=1e-14)


def test_midpoint_sampling():
    """sample evaluates at cell midpoints"""
    x = GridFunction.sample(lambda xi: xi, 4)
    assert_allclose(x.values, [0.125, 0.375, 0.625, 0.875])
    assert_allclose(midpoints(4), x.midpoints)
    constant = GridFunction.sample(lambda xi: 3.0, 5)
    assert_array_equal(constant.values, np.full(5, 3.0))


def test_refine_is_an_isometric_embedding():
    """Refinement keeps the norm and the function"""
    x = GridFunction([1.0, -2.0, 0.5])
    fine = x.refine(4)
    assert fine.n == 12
    assert_allclose(fine.norm(), x.norm(), rtol=1e-14)
    assert_array_equal(fine.values[:4], np.ones(4))


def test_grids_must_match():
    """Arithmetic across different grids is refused"""
    with pytest.raises(DimensionMismatch):
        GridFunction.zeros(4) + GridFunction.zeros(8)
    with pytest.raises(DimensionMismatch):
        GridFunction.zeros(4).inner(GridFunction.zeros(5))


def test_values_are_read_only():
    """Grid functions are immutable"""
    x = GridFunction([1.0, 2.0])
    with pytest.raises(ValueError):
        x.values[0] = 5.0
