"""
Time-domain machinery: the convolution (Pickard) operator, mild solutions,
the g-identity check and the splitting solver for x' = g(t, x) + k(t, x).

State maps are callables on raw value arrays (ndarray -> ndarray). A map may
also provide ``resolvent(b, c)`` returning the solution z of z - c*f(z) = b;
mild_solve then uses it for the implicit trapezoid stage instead of the
fixed-point correction.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import root

from utils.errors import (
    DimensionMismatch,
    ImplicitStageNonConvergent,
    InnerNonConvergent,
    MisalignedTime,
    OffGridTime,
)
from utils.space import GridFunction

logger = logging.getLogger(__name__)

GRID_TOL = 1e-12
INNER_TOL = 1e-12
INNER_MAX_ITER = 50


@dataclass(frozen=True)
class TimeGrid:
    T: float
    nt: int

    def __post_init__(self):
        if not self.T > 0 or int(self.nt) < 1:
            raise ValueError("TimeGrid needs T > 0 and nt >= 1")
        object.__setattr__(self, "nt", int(self.nt))

    @property
    def dt(self):
        return self.T / self.nt

    @property
    def times(self):
        return np.arange(self.nt + 1) * self.dt

    @property
    def weights(self):
        """Composite trapezoid weights on the grid"""
        w = np.full(self.nt + 1, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w

    @classmethod
    def aligned(cls, T, n):
        """Grid with dt equal to the cell width 1/n"""
        nt = int(round(T * n))
        if nt < 1 or abs(T - nt / n) > GRID_TOL * max(1.0, T):
            raise MisalignedTime("Horizon is not a whole number of cells", T=T, n=n)
        return cls(T, nt)

    def index_of(self, t):
        j = int(round(t / self.dt))
        if j < 0 or j > self.nt or abs(t - j * self.dt) > GRID_TOL * max(1.0, self.T):
            raise OffGridTime("Time is not a grid time", t=t, dt=self.dt, T=self.T)
        return j

    def check_shift_aligned(self, n):
        k = round(self.dt * n)
        if k < 1 or abs(self.dt - k / n) > GRID_TOL:
            raise MisalignedTime(
                "Time step is not a multiple of the cell width", dt=self.dt, h=1.0 / n
            )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States on a time grid; states[j] approximates z(j*dt)

    inner_weight is the weight of the inner product on a state; None means
    the cell width of a GridFunction state.
    """

    grid: TimeGrid
    states: np.ndarray
    inner_weight: float = None

    def __post_init__(self):
        states = np.array(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] != self.grid.nt + 1:
            raise DimensionMismatch(
                "Trajectory needs nt + 1 states",
                shape=list(states.shape),
                nt=self.grid.nt,
            )
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @classmethod
    def constant(cls, grid, values):
        return cls(grid, np.tile(np.asarray(values, dtype=float), (grid.nt + 1, 1)))

    @property
    def n(self):
        return self.states.shape[1]

    @property
    def times(self):
        return self.grid.times

    @property
    def weight(self):
        return 1.0 / self.n if self.inner_weight is None else self.inner_weight

    def state(self, j):
        return GridFunction(self.states[j])

    @property
    def final(self):
        return self.state(self.grid.nt)

    def norms(self):
        return np.sqrt(self.weight) * np.linalg.norm(self.states, axis=1)

    def sup_distance(self, other):
        return float(np.sqrt(self.weight) * np.linalg.norm(self.states - other.states, axis=1).max())


def _stepper(S, dt, n):
    """Callable applying Q(dt) to value arrays, with the propagator built once"""
    if S.is_shift:
        S.cells(dt, n)
        return lambda values: S.apply(dt, values)
    if S.generator.shape[0] != n:
        raise DimensionMismatch(
            "Generator does not match operand dimension",
            generator=S.generator.shape[0],
            operand=n,
        )
    propagator = S.propagator(dt)
    return lambda values: values @ propagator.T


def pickard_apply(S, z, t):
    """Composite trapezoid approximation of int_0^t Q(t - s) z(s) ds"""
    j = z.grid.index_of(t)
    dt = z.grid.dt
    step = _stepper(S, dt, z.n)
    acc = np.zeros(z.n)
    for i in range(j):
        acc = step(acc + 0.5 * dt * z.states[i]) + 0.5 * dt * z.states[i + 1]
    return GridFunction(acc)


def _fixed_point_stage(f, base, c, start, step_index):
    z = start
    for _ in range(INNER_MAX_ITER):
        z_next = base + c * f(z)
        change = np.linalg.norm(z_next - z)
        z = z_next
        if change <= INNER_TOL * (1.0 + np.linalg.norm(z)):
            return z
    raise InnerNonConvergent(
        "Implicit trapezoid correction did not settle",
        step=step_index,
        change=float(change),
        suggestion="reduce the time step",
    )


def mild_solve(S, B, f, u, grid, z0):
    """Mild solution z(t) = Q(t)z0 + int Q(t-s)[f(z(s)) + Bu(s)] ds

    Trapezoid in s on each step with the semigroup applied exactly, so
    states[j+1] = Q(dt)(states[j] + dt/2 F_j) + dt/2 F_{j+1} where
    F = f(z) + Bu. The f-part of F_{j+1} is resolved implicitly.
    """
    n = z0.n
    if S.is_shift:
        grid.check_shift_aligned(n)
    step = _stepper(S, grid.dt, n)
    half = 0.5 * grid.dt

    if u is not None:
        if u.grid.nt != grid.nt or abs(u.grid.T - grid.T) > GRID_TOL * max(1.0, grid.T):
            raise MisalignedTime("Control lives on a different time grid", T=u.grid.T, nt=u.grid.nt)
        forcing = B.apply(u.inputs)
    else:
        forcing = np.zeros((grid.nt + 1, n))
    if forcing.shape != (grid.nt + 1, n):
        raise DimensionMismatch(
            "Control does not match state dimension", shape=list(forcing.shape), n=n
        )

    resolvent = getattr(f, "resolvent", None)
    states = np.empty((grid.nt + 1, n))
    states[0] = z0.values
    for j in range(grid.nt):
        z = states[j]
        F = forcing[j] if f is None else f(z) + forcing[j]
        base = step(z + half * F) + half * forcing[j + 1]
        if f is None:
            states[j + 1] = base
        elif resolvent is not None:
            states[j + 1] = resolvent(base, half)
        else:
            predictor = step(z + grid.dt * F)
            states[j + 1] = _fixed_point_stage(f, base, half, predictor, j)
    return Trajectory(grid, states)


def g_identity_check(S, f, x, t, hstep):
    """Defect of d/dt int_0^t Q(t-s) f(x) ds = Q(t) f(x) by central differences"""
    if t - hstep < -GRID_TOL or hstep <= 0:
        raise OffGridTime("Difference stencil leaves [0, T]", t=t, hstep=hstep)
    m = int(round(t / hstep))
    if abs(t - m * hstep) > GRID_TOL * max(1.0, t):
        raise OffGridTime("t is not a multiple of the difference step", t=t, hstep=hstep)
    v = np.asarray(f(x.values), dtype=float)
    grid = TimeGrid((m + 1) * hstep, m + 1)
    integrand = Trajectory.constant(grid, v)
    upper = pickard_apply(S, integrand, grid.times[m + 1])
    lower = pickard_apply(S, integrand, grid.times[m - 1])
    derivative = (upper.values - lower.values) / (2.0 * hstep)
    return GridFunction(derivative - S.apply(t, v)).norm()


def schmidt_ivp_solve(g, k, grid, x0, tol=INNER_TOL, max_inner=100):
    """Solve x' = g(t, x) + k(t, x) with an implicit-explicit midpoint splitting

    g (the one-sided Lipschitz part) is treated by the implicit midpoint rule,
    k (the bounded part) by the explicit midpoint rule. Second order.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    dt = grid.dt
    states = np.empty((grid.nt + 1, x0.size))
    states[0] = x0
    for j in range(grid.nt):
        t, x = j * dt, states[j]
        t_half = t + 0.5 * dt
        predictor = x + 0.5 * dt * (g(t, x) + k(t, x))
        K = k(t_half, predictor)

        def residual(v):
            return v - x - 0.5 * dt * (g(t_half, v) + K)

        v = predictor
        converged = False
        for _ in range(max_inner):
            v_next = x + 0.5 * dt * (g(t_half, v) + K)
            change = np.linalg.norm(v_next - v)
            v = v_next
            if change <= tol * (1.0 + np.linalg.norm(v)):
                converged = True
                break
        if not converged:
            logger.debug("Fixed-point stage stalled at step %d; trying Newton", j)
            solution = root(residual, predictor, method="hybr", tol=tol)
            v = solution.x
            if not solution.success or np.linalg.norm(residual(v)) > 1e3 * tol * (
                1.0 + np.linalg.norm(v)
            ):
                raise ImplicitStageNonConvergent(
                    "Implicit midpoint stage did not converge",
                    step=j,
                    t=t,
                    dt=dt,
                    suggestion="reduce dt; g may not be dissipative enough at this step size",
                )
        states[j + 1] = 2.0 * np.broadcast_to(v, x.shape) - x
    return Trajectory(grid, states, inner_weight=1.0)


def integral_form_residual(g, k, trajectory):
    """sup_t ||x(t) - x(0) - int_0^t (g + k)(s, x(s)) ds|| (trapezoid)"""
    times = trajectory.times
    rates = np.array(
        [
            np.broadcast_to(g(t, x) + k(t, x), x.shape)
            for t, x in zip(times, trajectory.states)
        ]
    )
    dt = trajectory.grid.dt
    increments = 0.5 * dt * (rates[1:] + rates[:-1])
    integral = np.vstack([np.zeros(trajectory.n), np.cumsum(increments, axis=0)])
    defects = trajectory.states - trajectory.states[0] - integral
    return float(np.sqrt(trajectory.weight) * np.linalg.norm(defects, axis=1).max())
