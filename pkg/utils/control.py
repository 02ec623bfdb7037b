"""
Linear exact controllability: the input map W = L(T)B, the controllability
Gramian and the minimum-norm right inverse of W.

Controls are compared in the discrete L2(0,T; U) norm given by the
trapezoid weights in time and the cell width in space. In that norm the
adjoint of W is y -> (B*Q*(T - s_j) y)_j and W W* is exactly the assembled
Gramian, so the minimum-norm control is u = W* G^-1 y.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigvalsh

from utils.dynamics import GRID_TOL, TimeGrid, Trajectory, mild_solve, pickard_apply
from utils.errors import (
    DimensionMismatch,
    KinkProximity,
    MisalignedTime,
    NotControllable,
    OffGridTime,
)
from utils.space import GridFunction

logger = logging.getLogger(__name__)

# Beyond this the reconstruction ||W W^-1 y - y|| <= 1e-8 is out of reach
COND_LIMIT = 1e12
REFINEMENT_STEPS = 5


class MultiplicationOperator:
    """B u = m * u, cellwise"""

    def __init__(self, m):
        self.m = np.array(m, dtype=float)
        self.m.setflags(write=False)

    @property
    def n(self):
        return self.m.size

    def apply(self, values):
        return np.asarray(values, dtype=float) * self.m

    adjoint = apply

    def matrix(self):
        return np.diag(self.m)


class MatrixOperator:
    def __init__(self, matrix):
        self._matrix = np.array(matrix, dtype=float)
        if self._matrix.ndim != 2 or self._matrix.shape[0] != self._matrix.shape[1]:
            raise DimensionMismatch(
                "Control operator must be square", shape=list(self._matrix.shape)
            )

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @property
    def n(self):
        return self._matrix.shape[0]

    def apply(self, values):
        return np.asarray(values, dtype=float) @ self._matrix.T

    def adjoint(self, values):
        return np.asarray(values, dtype=float) @ self._matrix

    def matrix(self):
        return self._matrix.copy()


@dataclass(frozen=True, eq=False)
class ControlSignal:
    grid: TimeGrid
    inputs: np.ndarray

    def __post_init__(self):
        inputs = np.array(self.inputs, dtype=float)
        if inputs.ndim != 2 or inputs.shape[0] != self.grid.nt + 1:
            raise DimensionMismatch(
                "Control needs nt + 1 inputs", shape=list(inputs.shape), nt=self.grid.nt
            )
        inputs.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)

    @classmethod
    def zeros(cls, grid, n):
        return cls(grid, np.zeros((grid.nt + 1, n)))

    @classmethod
    def constant(cls, grid, values):
        return cls(grid, np.tile(np.asarray(values, dtype=float), (grid.nt + 1, 1)))

    @property
    def n(self):
        return self.inputs.shape[1]

    def energy(self):
        """sum_j w_j ||u_j||^2 with trapezoid weights w_j"""
        return float(np.dot(self.grid.weights, np.sum(self.inputs ** 2, axis=1)) / self.n)

    def norm(self):
        return float(np.sqrt(self.energy()))

    def derivative(self):
        """Central differences in s, one-sided at the ends"""
        return ControlSignal(self.grid, np.gradient(self.inputs, self.grid.dt, axis=0))

    def __add__(self, other):
        return ControlSignal(self.grid, self.inputs + other.inputs)

    def __sub__(self, other):
        return ControlSignal(self.grid, self.inputs - other.inputs)


def control_energy(u):
    return u.energy()


@dataclass(frozen=True, eq=False)
class GramianOperator:
    matrix: np.ndarray
    T: float
    cond_estimate: float
    min_eig: float
    max_eig: float
    rank: int

    @property
    def n(self):
        return self.matrix.shape[0]

    def diagnostics(self):
        return {
            "T": self.T,
            "n": self.n,
            "cond_estimate": self.cond_estimate,
            "min_eig": self.min_eig,
            "max_eig": self.max_eig,
            "rank": self.rank,
        }


def _check_horizon(grid, T):
    if abs(grid.T - T) > GRID_TOL * max(1.0, T):
        raise MisalignedTime("Time grid does not end at the horizon", T=T, grid_T=grid.T)


def reachability_apply(S, B, u, T):
    """W u = int_0^T Q(T - s) B u(s) ds, i.e. the mild solution from 0 at T"""
    _check_horizon(u.grid, T)
    return mild_solve(S, B, None, u, u.grid, GridFunction.zeros(u.n)).final


def assemble_gramian(S, B, T, grid, method="adjoint"):
    """Trapezoid-weighted sum of Q(T-s) B B* Q*(T-s) over the grid"""
    _check_horizon(grid, T)
    n = B.n
    if S.is_shift:
        grid.check_shift_aligned(n)
    identity = np.eye(n)
    B_matrix = B.matrix()
    times = grid.times
    G = np.zeros((n, n))
    for j, weight in enumerate(grid.weights):
        tau = times[grid.nt - j]
        if method == "adjoint":
            # rows are B* Q*(tau) e_i, so the block is R R^T
            block = B.adjoint(S.apply(tau, identity, adjoint=True))
        else:
            block = S.matrix(tau, n) @ B_matrix
        G += weight * block @ block.T
    G = 0.5 * (G + G.T)

    eigenvalues = eigvalsh(G)
    min_eig, max_eig = float(eigenvalues[0]), float(eigenvalues[-1])
    cond = max_eig / min_eig if min_eig > 0 else float("inf")
    rank = int(np.sum(eigenvalues > max(max_eig, 0.0) * n * np.finfo(float).eps))
    logger.debug("Gramian T=%s n=%d cond=%.3e rank=%d", T, n, cond, rank)
    return GramianOperator(G, T, cond, min_eig, max_eig, rank)


class ControllabilityContext:
    """W, W* and the minimum-norm W^-1 for a fixed (S, B, grid)"""

    def __init__(self, S, B, grid, gramian=None):
        self.S = S
        self.B = B
        self.grid = grid
        self.gramian = gramian or assemble_gramian(S, B, grid.T, grid)
        if not self.gramian.cond_estimate <= COND_LIMIT:
            raise NotControllable(
                "Gramian is singular at this discretization",
                **self.gramian.diagnostics(),
            )
        try:
            self._factor = cho_factor(self.gramian.matrix)
        except LinAlgError as e:
            raise NotControllable(
                f"Gramian is not positive definite: {e}", **self.gramian.diagnostics()
            )

    @property
    def n(self):
        return self.B.n

    def forward(self, u):
        return reachability_apply(self.S, self.B, u, self.grid.T)

    def adjoint(self, w):
        """(W* w)(s_j) = B* Q*(T - s_j) w"""
        times = self.grid.times
        w = np.asarray(w, dtype=float)
        inputs = np.array(
            [
                self.B.adjoint(self.S.apply(times[self.grid.nt - j], w, adjoint=True))
                for j in range(self.grid.nt + 1)
            ]
        )
        return ControlSignal(self.grid, inputs)

    def solve_gramian(self, y):
        """G^-1 y by Cholesky with iterative refinement"""
        G = self.gramian.matrix
        w = cho_solve(self._factor, y)
        target = 1e-12 * (1.0 + np.linalg.norm(y))
        for _ in range(REFINEMENT_STEPS):
            residual = y - G @ w
            if np.linalg.norm(residual) <= target:
                break
            w = w + cho_solve(self._factor, residual)
        return w

    def inverse(self, y):
        values = y.values if isinstance(y, GridFunction) else np.asarray(y, dtype=float)
        return self.adjoint(self.solve_gramian(values))

    def kernel_projection(self, v):
        """Component of the control v in ker W"""
        return v - self.inverse(self.forward(v))

    def kink_times(self, y):
        """Times where the switch-on front of W^-1 y enters the domain (shift only)"""
        if not self.S.is_shift:
            return []
        w = self.solve_gramian(y.values)
        support = np.abs(w) > 1e-14 * max(np.abs(w).max(), np.finfo(float).tiny)
        edges = np.flatnonzero(np.diff(np.concatenate([[False], support])))
        h = 1.0 / self.n
        return [self.grid.T - (self.n - 1 - b) * h for b in edges]


def min_norm_control(S, B, T, y, grid):
    _check_horizon(grid, T)
    return ControllabilityContext(S, B, grid).inverse(y)


def kernel_projection(ctx, v):
    return ctx.kernel_projection(v)


def k_identity_check(S, B, ctx, x, t, hstep):
    """Defect of d/dt int_0^t Q(t-s)Bu(s) ds = Q(t)Bu(0) + L(t)Bu' with u = W^-1 x"""
    grid = ctx.grid
    q = int(round(hstep / grid.dt))
    if q < 1 or abs(hstep - q * grid.dt) > GRID_TOL * max(1.0, grid.T):
        raise OffGridTime("Difference step is not a multiple of dt", hstep=hstep, dt=grid.dt)
    grid.index_of(t - hstep)
    grid.index_of(t + hstep)
    for tau in ctx.kink_times(x):
        if abs(t - tau) <= 2 * grid.dt:
            raise KinkProximity("t is next to a kink of the control", t=t, kink=tau)

    u = ctx.inverse(x)
    forcing = Trajectory(grid, B.apply(u.inputs))
    upper = pickard_apply(S, forcing, t + hstep)
    lower = pickard_apply(S, forcing, t - hstep)
    derivative = (upper.values - lower.values) / (2.0 * hstep)

    rate = Trajectory(grid, B.apply(u.derivative().inputs))
    rhs = S.apply(t, B.apply(u.inputs[0])) + pickard_apply(S, rate, t).values
    return GridFunction(derivative - rhs).norm()
