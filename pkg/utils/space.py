"""
Discrete state/control space L2(0,1) on a uniform cell grid, and the
isometry with truncated l2 that the transport nonlinearity is defined through.
"""
from dataclasses import dataclass

import numpy as np

from utils.errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Cell averages of an L2(0,1) function on a uniform n-cell grid.

    The inner product is the one induced by piecewise-constant functions,
    <x, y> = h * sum(x_i * y_i) with h = 1/n.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise DimensionMismatch(
                "GridFunction needs a nonempty 1-D array of cell values",
                shape=list(values.shape),
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self):
        return self.values.size

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def midpoints(self):
        return midpoints(self.n)

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n))

    @classmethod
    def sample(cls, fn, n):
        """Project a callable onto the grid by midpoint sampling"""
        return cls(np.asarray(fn(midpoints(n)), dtype=float) * np.ones(n))

    def _check(self, other):
        if self.n != other.n:
            raise DimensionMismatch(
                "Grid functions live on different grids", left=self.n, right=other.n
            )

    def inner(self, other):
        self._check(other)
        return self.h * float(np.dot(self.values, other.values))

    def norm(self):
        return float(np.sqrt(self.h) * np.linalg.norm(self.values))

    def refine(self, factor):
        """Exact embedding into a grid with factor times more cells"""
        return GridFunction(np.repeat(self.values, int(factor)))

    def __add__(self, other):
        self._check(other)
        return GridFunction(self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return GridFunction(self.values - other.values)

    def __mul__(self, scalar):
        return GridFunction(float(scalar) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(-self.values)

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)

    def to_list(self):
        return self.values.tolist()


@dataclass(frozen=True, eq=False)
class SeqVector:
    """Leading coordinates of an l2 sequence"""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other):
        if self.coeffs.size != other.coeffs.size:
            raise DimensionMismatch(
                "Sequences have different lengths",
                left=self.coeffs.size,
                right=other.coeffs.size,
            )
        return float(np.dot(self.coeffs, other.coeffs))


def midpoints(n):
    return (np.arange(n) + 0.5) / n


def p_forward(x):
    """Coordinates of x in the normalized indicator basis sqrt(n) * 1_[cell i]"""
    return SeqVector(x.values * np.sqrt(x.h))


def p_inverse(a):
    n = a.coeffs.size
    return GridFunction(a.coeffs / np.sqrt(1.0 / n))
