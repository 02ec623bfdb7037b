"""Tests for the shift and dense-matrix semigroups"""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from utils.errors import DimensionMismatch, MisalignedTime
from utils.semigroup import (
    SemigroupHandle,
    generator_identity_defect,
    sg_adjoint_apply,
    sg_apply,
)
from utils.space import GridFunction


def _random(n, seed):
    return GridFunction(np.random.default_rng(seed).standard_normal(n))


def test_shift_at_zero_is_identity():
    """Q(0) = I for both realizations"""
    x = _random(16, 1)
    assert sg_apply(SemigroupHandle.shift(), 0.0, x) == x
    assert sg_adjoint_apply(SemigroupHandle.shift(), 0.0, x) == x
    dense = SemigroupHandle.dense(np.random.default_rng(2).standard_normal((16, 16)))
    assert_allclose(sg_apply(dense, 0.0, x).values, x.values, atol=1e-14)


def test_shift_is_nilpotent():
    """Q(t) = 0 and Q*(t) = 0 for t >= 1"""
    S = SemigroupHandle.shift()
    rng = np.random.default_rng(0)
    for n in (8, 64):
        for _ in range(100):
            x = GridFunction(rng.standard_normal(n))
            for t in (1.0, 1.0 + 3.0 / n, 2.0):
                assert_array_equal(sg_apply(S, t, x).values, np.zeros(n))
                assert_array_equal(sg_adjoint_apply(S, t, x).values, np.zeros(n))


def test_shift_substitutes_xi_plus_t():
    """x(xi) = xi shifted by 0.5 is xi + 0.5 where it stays inside, else 0"""
    n = 64
    x = GridFunction.sample(lambda xi: xi, n)
    shifted = sg_apply(SemigroupHandle.shift(), 0.5, x)
    xi = x.midpoints
    expected = np.where(xi + 0.5 <= 1 - 0.5 / n, xi + 0.5, 0.0)
    assert_allclose(shifted.values, expected, atol=1e-15)


def test_semigroup_law():
    """Q(t + s) = Q(t)Q(s) exactly for the shift, to 1e-10 for a dense generator"""
    x = _random(32, 4)
    S = SemigroupHandle.shift()
    s, t = 5 / 32, 9 / 32
    assert sg_apply(S, s + t, x) == sg_apply(S, t, sg_apply(S, s, x))

    A = np.random.default_rng(5).standard_normal((32, 32)) / 4
    dense = SemigroupHandle.dense(A)
    lhs = sg_apply(dense, 0.7, x)
    rhs = sg_apply(dense, 0.4, sg_apply(dense, 0.3, x))
    assert (lhs - rhs).norm() <= 1e-10


def test_adjoint_duality():
    """<Q(t)x, y> = <x, Q*(t)y>"""
    rng = np.random.default_rng(3)
    x, y = GridFunction(rng.standard_normal(64)), GridFunction(rng.standard_normal(64))
    for S in (SemigroupHandle.shift(), SemigroupHandle.dense(rng.standard_normal((64, 64)) / 8)):
        lhs = sg_apply(S, 0.25, x).inner(y)
        rhs = x.inner(sg_adjoint_apply(S, 0.25, y))
        assert abs(lhs - rhs) <= 1e-12 * (1 + x.norm() * y.norm())


def test_shift_contracts():
    """||Q(t)x|| <= ||x||"""
    S = SemigroupHandle.shift()
    x = _random(16, 6)
    for k in range(20):
        assert sg_apply(S, k / 16, x).norm() <= x.norm()
    assert S.contraction_bound(0.5, 16) == 1.0
    assert S.contraction_bound(1.0, 16) == 0.0


def test_misaligned_shift_time():
    """The shift needs whole cells"""
    with pytest.raises(MisalignedTime):
        sg_apply(SemigroupHandle.shift(), 0.3, _random(8, 0))
    with pytest.raises(MisalignedTime):
        sg_apply(SemigroupHandle.shift(), -0.125, _random(8, 0))


def test_dense_dimension_mismatch():
    """Generator and operand must agree"""
    with pytest.raises(DimensionMismatch):
        sg_apply(SemigroupHandle.dense(np.eye(3)), 0.1, _random(4, 0))
    with pytest.raises(DimensionMismatch):
        SemigroupHandle.dense(np.ones((2, 3)))


def test_generator_identity_decays_quadratically():
    """A int_0^t Q(s)x ds = Q(t)x - x up to the trapezoid error"""
    rng = np.random.default_rng(8)
    A = rng.standard_normal((10, 10)) / 6
    dense = SemigroupHandle.dense(A)
    x = GridFunction(rng.standard_normal(10))
    coarse = generator_identity_defect(dense, x, 1.0, 20)
    fine = generator_identity_defect(dense, x, 1.0, 40)
    assert 0 < fine <= coarse / 3.5
