"""
Exact steering of the semilinear system by fixed-point iteration.

Starting from z = 0 each iteration picks the minimum-norm control that
compensates the nonlinear convolution at the horizon,

    u_k = W^-1 (x_T - int_0^T Q(T - s) f(z_k(s)) ds),

and moves to the mild solution driven by it (optionally relaxed),

    z_{k+1} = (1 - omega) z_k + omega * mild_solve(u_k).

A fixed point z = mild_solve(u) with z(T) = x_T is an exact steering.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from utils.control import ControllabilityContext
from utils.dynamics import Trajectory, mild_solve, pickard_apply
from utils.errors import ConfigInvalid, NonConvergent
from utils.space import GridFunction

logger = logging.getLogger(__name__)


def _is_real(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass(frozen=True)
class SteeringOptions:
    max_iter: int = 200
    relaxation: float = 1.0
    tol_fixed_point: float = 1e-8
    tol_terminal: float = 5e-9
    divergence_factor: float = 1e6
    stagnation_window: int = 25

    def __post_init__(self):
        errors = []
        if not _is_real(self.relaxation) or not 0 < self.relaxation <= 1:
            errors.append("steering.relaxation: must lie in (0, 1]")
        for name in ("max_iter", "stagnation_window"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                errors.append(f"steering.{name}: must be a positive integer")
        for name in ("tol_fixed_point", "tol_terminal", "divergence_factor"):
            value = getattr(self, name)
            if not _is_real(value) or not value > 0:
                errors.append(f"steering.{name}: must be positive")
        if errors:
            raise ConfigInvalid(errors)

    @classmethod
    def from_dict(cls, data):
        data = dict(data or {})
        if "omega" in data:
            data["relaxation"] = data.pop("omega")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigInvalid(f"steering.{key}: unknown option" for key in sorted(unknown))
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigInvalid([f"steering: {e}"])


@dataclass
class SteeringResult:
    trajectory: Trajectory
    control: object
    iterations: int
    terminal_residual: float
    fixed_point_gap: float
    gap_history: list = field(default_factory=list)

    @property
    def control_energy(self):
        return self.control.energy()

    def summary(self):
        return {
            "iterations": self.iterations,
            "terminal_residual": self.terminal_residual,
            "fixed_point_gap": self.fixed_point_gap,
            "control_energy": self.control_energy,
        }


def _nonlinear_convolution(S, f, z):
    if f is None:
        return np.zeros(z.n)
    images = Trajectory(z.grid, np.array([f(state) for state in z.states]))
    return pickard_apply(S, images, z.grid.T).values


def steer(S, B, f, x_T, grid, opts=None, context=None):
    """Steer z' = Az + f(z) + Bu from z(0) = 0 to x_T at the grid horizon"""
    opts = opts or SteeringOptions()
    context = context or ControllabilityContext(S, B, grid)
    n = x_T.n
    zero = GridFunction.zeros(n)
    scale = 1.0 + x_T.norm()
    omega = opts.relaxation

    z = Trajectory(grid, np.zeros((grid.nt + 1, n)))
    history = []
    for k in range(1, opts.max_iter + 1):
        u = context.inverse(x_T.values - _nonlinear_convolution(S, f, z))
        solved = mild_solve(S, B, f, u, grid, zero)
        if omega == 1.0:
            z_next = solved
        else:
            z_next = Trajectory(grid, (1.0 - omega) * z.states + omega * solved.states)

        gap = z_next.sup_distance(z)
        terminal = (solved.final - x_T).norm()
        history.append(gap)
        logger.debug("Iteration %d: gap %.3e terminal residual %.3e", k, gap, terminal)

        if gap <= opts.tol_fixed_point and terminal <= opts.tol_terminal * scale:
            # the application that confirms the fixed point is not counted
            iterations = max(1, k - 1)
            logger.info(
                "Steering converged after %d iterations (gap %.3e, residual %.3e)",
                iterations,
                gap,
                terminal,
            )
            return SteeringResult(solved, u, iterations, terminal, gap, history)

        if not np.isfinite(gap) or gap > opts.divergence_factor * scale:
            raise NonConvergent(
                "Fixed-point iteration diverged",
                iterations=k,
                fixed_point_gap=float(gap),
                suggestion="reduce the relaxation omega",
            )
        window = opts.stagnation_window
        if k > window and min(history[-window:]) >= min(history[:-window]):
            raise NonConvergent(
                "Fixed-point gap stagnated",
                iterations=k,
                fixed_point_gap=float(gap),
                terminal_residual=float(terminal),
                suggestion="reduce the relaxation omega",
            )
        z = z_next

    raise NonConvergent(
        "Fixed-point iteration hit the iteration limit",
        iterations=opts.max_iter,
        fixed_point_gap=float(history[-1]),
        suggestion="raise max_iter or reduce the relaxation omega",
    )
