"""
Runtime invariant suite behind `cli.py selftest`.

Each check returns (passed, detail); run_selftest prints one line per check
and reports whether all of them passed.
"""
import logging
import time

import numpy as np

from config.transport import default_transport
from utils.analysis import (
    bracket,
    bracket_quotient,
    estimate_one_sided_constant,
    kuratowski_n,
    lipschitz_ratio_probe,
    random_pairs,
)
from utils.control import (
    ControllabilityContext,
    MatrixOperator,
    MultiplicationOperator,
    assemble_gramian,
)
from utils.dynamics import TimeGrid, mild_solve, schmidt_ivp_solve
from utils.errors import ControllabilityError
from utils.semigroup import SemigroupHandle
from utils.space import GridFunction, midpoints
from utils.transport import (
    NonlinearitySpec,
    apply_f,
    build_transport_model,
    lipschitz_witness,
    steer_transport,
)

logger = logging.getLogger(__name__)

F_BOUND = 1.2826


def check_nilpotency(seed):
    S = SemigroupHandle.shift()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (8, 64):
        for _ in range(100):
            x = rng.standard_normal(n)
            worst = max(worst, np.abs(S.apply(1.0, x)).max())
            # Q(t + s) = Q(t) Q(s) with whole-cell times
            s, t = 3 / n, 5 / n
            worst = max(worst, np.abs(S.apply(t + s, x) - S.apply(t, S.apply(s, x))).max())
    return worst == 0.0, f"max defect {worst:.1e}"


def check_lipschitz_witness(seed):
    rho = NonlinearitySpec(8).rho
    worst = 0.0
    for m in (4, 16, 64, 256, 10_000):
        ratio = lipschitz_ratio_probe(rho, [lipschitz_witness(m, 8)]).estimate
        worst = max(worst, abs(ratio - np.sqrt(m)))
    return worst <= 1e-9, f"max |ratio - sqrt(m)| {worst:.1e}"


def check_dissipativity(seed):
    n = 64
    rho = NonlinearitySpec(n).rho
    report = estimate_one_sided_constant(rho, random_pairs(n, seed, -2.0, 2.0), 10_000, seed)
    return report.estimate <= 1e-12, f"one-sided constant {report.estimate:.3e}"


def check_f_bound(seed):
    rng = np.random.default_rng(seed)
    worst = max(apply_f(GridFunction(rng.uniform(-20, 20, 64))).norm() for _ in range(1000))
    return worst <= F_BOUND, f"max ||f(x)|| {worst:.4f}"


def check_brackets(seed):
    rng = np.random.default_rng(seed)
    violation = quotient = 0.0
    for dim in (2, 64):
        for _ in range(500):
            x, y, z = rng.standard_normal((3, dim))
            plus, minus = bracket(x, y, "plus"), bracket(x, y, "minus")
            norm_y = np.linalg.norm(y)
            if np.linalg.norm(x) >= 0.5:
                gap = abs(plus - bracket_quotient(x, y, "plus")) / (1 + norm_y)
                quotient = max(quotient, gap)
            violation = max(
                violation,
                minus - plus,
                abs(plus) - norm_y,
                bracket(x, y + z) - plus - np.linalg.norm(z),
            )
    zero_ok = bracket(np.zeros(3), np.array([3.0, 4.0]), "minus") == -5.0
    ok = violation <= 1e-9 and quotient <= 1e-6 and zero_ok
    return ok, f"max violation {violation:.1e}, quotient gap {quotient:.1e}"


def check_cover_proxy(seed):
    value = kuratowski_n([0.0, 1.0, 2.0, 10.0], 2)
    return value == 2.0, f"alpha_2({{0,1,2,10}}) = {value}"


def check_gramian(seed):
    n, T = 64, 1.25
    grid = TimeGrid.aligned(T, n)
    G = assemble_gramian(SemigroupHandle.shift(), MultiplicationOperator(np.ones(n)), T, grid)
    law = np.minimum(T, 1.0 - midpoints(n))
    diagonal = np.abs(np.diag(G.matrix) - law).max()
    off = np.abs(G.matrix - np.diag(np.diag(G.matrix))).max()
    identity = assemble_gramian(
        SemigroupHandle.dense(np.zeros((4, 4))), MatrixOperator.identity(4), 1.0, TimeGrid(1.0, 10)
    )
    eye = np.abs(identity.matrix - np.eye(4)).max()
    ok = diagonal <= 3 * grid.dt and off <= 3 * grid.dt and eye <= 1e-12
    return ok, f"diagonal {diagonal:.1e}, off-diagonal {off:.1e}, identity {eye:.1e}"


def check_linear_control(seed):
    n, T = 64, 1.25
    grid = TimeGrid.aligned(T, n)
    S = SemigroupHandle.shift()
    rng = np.random.default_rng(seed)
    B = MultiplicationOperator(rng.uniform(0.5, 1.5, n))
    ctx = ControllabilityContext(S, B, grid)
    worst = 0.0
    for _ in range(20):
        y = GridFunction(rng.standard_normal(n))
        u = ctx.inverse(y)
        reached = mild_solve(S, B, None, u, grid, GridFunction.zeros(n)).final
        worst = max(worst, (reached - y).norm() / y.norm())
    return worst <= 1e-8, f"max relative residual {worst:.1e}"


def check_schmidt(seed):
    grid = TimeGrid(1.0, 1000)
    trajectory = schmidt_ivp_solve(lambda t, x: -x, lambda t, x: np.ones_like(x), grid, [0.0])
    error = abs(trajectory.states[-1, 0] - (1.0 - np.exp(-1.0)))
    return error <= 1e-6, f"|x(1) - (1 - 1/e)| {error:.1e}"


def check_steering(seed):
    model = build_transport_model({"seed": seed}, default_transport)
    result = steer_transport(model)
    limit = 1e-6 * (1.0 + model.target.norm())
    return result.terminal_residual <= limit, (
        f"{result.iterations} iterations, residual {result.terminal_residual:.1e}"
    )


CHECKS = [
    ("nilpotent shift and semigroup law", check_nilpotency),
    ("non-Lipschitz witness ratio sqrt(m)", check_lipschitz_witness),
    ("dissipativity of f", check_dissipativity),
    ("uniform bound on f", check_f_bound),
    ("bracket laws", check_brackets),
    ("covering proxy", check_cover_proxy),
    ("Gramian closed form", check_gramian),
    ("linear exact controllability", check_linear_control),
    ("splitting IVP solver", check_schmidt),
    ("semilinear steering", check_steering),
]


def run_selftest(seed):
    """Run every check, printing a line each; True when all pass"""
    results = []
    for name, check in CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = check(seed)
        except ControllabilityError as e:
            passed, detail = False, f"{type(e).__name__}: {e.message}"
        elapsed = time.perf_counter() - start
        mark = "✓" if passed else "✗"
        print(f"{mark} {name}: {detail} ({elapsed:.2f}s)")
        logger.debug("Check %s finished in %.3fs", name, elapsed)
        results.append(passed)
    return all(results)
