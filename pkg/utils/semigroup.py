"""
C0-semigroups on the discrete space: the nilpotent left shift of the
transport example and a dense matrix exponential used as a cross-check.

Evaluation works on raw value arrays (last axis = cells) so the time
stepping code can push whole trajectories through; the GridFunction
wrappers `sg_apply` / `sg_adjoint_apply` are the public entry points.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import expm

from utils.errors import DimensionMismatch, MisalignedTime
from utils.space import GridFunction

# Tolerance for deciding that t is a whole number of cells
ALIGN_TOL = 1e-12


class SemigroupKind(Enum):
    NILPOTENT_LEFT_SHIFT = "shift"
    DENSE_MATRIX = "dense"


@dataclass(frozen=True, eq=False)
class SemigroupHandle:
    kind: SemigroupKind
    generator: np.ndarray = None

    def __post_init__(self):
        if self.kind is SemigroupKind.DENSE_MATRIX:
            generator = np.array(self.generator, dtype=float)
            if generator.ndim != 2 or generator.shape[0] != generator.shape[1]:
                raise DimensionMismatch(
                    "Generator must be a square matrix", shape=list(generator.shape)
                )
            generator.setflags(write=False)
            object.__setattr__(self, "generator", generator)

    @classmethod
    def shift(cls):
        return cls(SemigroupKind.NILPOTENT_LEFT_SHIFT)

    @classmethod
    def dense(cls, generator):
        return cls(SemigroupKind.DENSE_MATRIX, generator)

    @property
    def is_shift(self):
        return self.kind is SemigroupKind.NILPOTENT_LEFT_SHIFT

    def cells(self, t, n):
        """Number of whole cells the shift moves by at time t"""
        if t < 0:
            raise MisalignedTime("Semigroup evaluated at negative time", t=t)
        k = int(round(t * n))
        if abs(t - k / n) > ALIGN_TOL:
            raise MisalignedTime(
                "Shift time is not a multiple of the cell width", t=t, h=1.0 / n
            )
        return k

    def propagator(self, t, adjoint=False):
        generator = self.generator.T if adjoint else self.generator
        return expm(t * generator)

    def apply(self, t, values, adjoint=False):
        values = np.asarray(values, dtype=float)
        n = values.shape[-1]
        if self.is_shift:
            k = self.cells(t, n)
            out = np.zeros_like(values)
            if k < n:
                if adjoint:
                    out[..., k:] = values[..., : n - k]
                else:
                    out[..., : n - k] = values[..., k:]
            return out

        if t < 0:
            raise MisalignedTime("Semigroup evaluated at negative time", t=t)
        if self.generator.shape[0] != n:
            raise DimensionMismatch(
                "Generator does not match operand dimension",
                generator=self.generator.shape[0],
                operand=n,
            )
        return values @ self.propagator(t, adjoint).T

    def matrix(self, t, n, adjoint=False):
        """Q(t) (or Q*(t)) as an explicit n x n matrix"""
        return self.apply(t, np.eye(n), adjoint=adjoint).T

    def contraction_bound(self, t, n):
        """Operator norm of Q(t)"""
        if self.is_shift:
            return 0.0 if self.cells(t, n) >= n else 1.0
        return float(np.linalg.norm(self.propagator(t), 2))


def sg_apply(S, t, x):
    return GridFunction(S.apply(t, x.values))


def sg_adjoint_apply(S, t, x):
    return GridFunction(S.apply(t, x.values, adjoint=True))


def generator_identity_defect(S, x, t, nt):
    """||A * trapezoid(int_0^t Q(s)x ds) - (Q(t)x - x)|| for a dense handle"""
    if S.is_shift:
        raise ValueError("The generator identity needs an explicit generator")
    ds = t / nt
    step = S.propagator(ds)
    current = x.values.copy()
    integral = 0.5 * current
    for _ in range(nt - 1):
        current = step @ current
        integral = integral + current
    current = step @ current
    integral = ds * (integral + 0.5 * current)
    lhs = S.generator @ integral
    rhs = S.apply(t, x.values) - x.values
    return GridFunction(lhs - rhs).norm()
