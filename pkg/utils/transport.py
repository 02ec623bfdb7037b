"""
The transport example: z_t = z_xi + m(xi) u + f(z) on (0,1) with z(0) = 0,
the nilpotent left shift as semigroup, B = multiplication by m and the
non-Lipschitz dissipative nonlinearity f = P^-1 rho P.
"""
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from utils.analysis import (
    FinitePointSet,
    ProbeReport,
    condensing_ratio,
    estimate_one_sided_constant,
    lipschitz_ratio_probe,
    random_pairs,
)
from utils.control import MultiplicationOperator
from utils.dynamics import TimeGrid
from utils.errors import ConfigInvalid, ControllabilityError, DimensionMismatch
from utils.io import read_grid_function_csv
from utils.semigroup import SemigroupHandle
from utils.space import GridFunction, SeqVector, midpoints, p_forward, p_inverse
from utils.steer import SteeringOptions, steer

MIN_CELLS = 8
# alpha(Q(t) D) <= 2 alpha(D) for the shift
SHIFT_CONDENSING_BOUND = 2.0


def phi(a):
    """0 below 0, -sqrt on [0, 1], -1 above 1; continuous and non-increasing"""
    a = np.asarray(a, dtype=float)
    return np.where(a < 0, 0.0, -np.sqrt(np.clip(a, 0.0, 1.0)))


@dataclass(frozen=True)
class NonlinearitySpec:
    """rho(a)_i = phi(a_i) / i on the first n coordinates"""

    n: int

    @property
    def weights(self):
        return 1.0 / np.arange(1, self.n + 1)

    def rho(self, coeffs):
        return self.weights * phi(coeffs)

    def bound(self):
        """sup ||rho(a)|| = sqrt(sum_{i<=n} 1/i^2)"""
        return float(np.sqrt(np.sum(self.weights ** 2)))

    def truncation_bound(self):
        return 1.0 / math.sqrt(self.n)


class TransportNonlinearity:
    """f = P^-1 rho P acting on cell values"""

    def __init__(self, n):
        self.spec = NonlinearitySpec(n)
        self._scale = np.sqrt(1.0 / n)

    @property
    def n(self):
        return self.spec.n

    def __call__(self, values):
        return self.spec.rho(np.asarray(values, dtype=float) * self._scale) / self._scale

    def resolvent(self, b, c):
        """Solve z - c f(z) = b coordinatewise in closed form (c >= 0)"""
        beta = np.asarray(b, dtype=float) * self._scale
        k = c * self.spec.weights
        positive = np.maximum(beta, 0.0)
        r = 2.0 * positive / (k + np.sqrt(k ** 2 + 4.0 * positive))
        a = np.where(beta <= 0, beta, np.where(beta <= 1.0 + k, r ** 2, beta - k))
        return a / self._scale


def apply_f(x):
    spec = NonlinearitySpec(x.n)
    return p_inverse(SeqVector(spec.rho(p_forward(x).coeffs)))


def lipschitz_witness(m, n):
    """Pair (x_m, 0) with P x_m = (1/m, 0, ...)"""
    coeffs = np.zeros(n)
    coeffs[0] = 1.0 / m
    return coeffs, np.zeros(n)


# ------------------------------------------------------------------------------
# Configuration
# ------------------------------------------------------------------------------


def _profile_errors(name, spec, n, allow_zero=False):
    errors = []
    if not isinstance(spec, dict) or "kind" not in spec:
        return [f"{name}: expected an object with a 'kind'"]
    kind = spec["kind"]
    if kind == "zero" and allow_zero:
        return []
    if kind == "sine":
        if not isinstance(spec.get("k", 1), int) or spec.get("k", 1) < 1:
            errors.append(f"{name}.k: must be a positive integer")
    elif kind == "gauss":
        if not _is_number(spec.get("center")):
            errors.append(f"{name}.center: must be a number")
        if not _is_number(spec.get("width")) or spec.get("width") <= 0:
            errors.append(f"{name}.width: must be a positive number")
    elif kind == "csv":
        path = spec.get("path")
        if not isinstance(path, str) or not Path(path).is_file():
            errors.append(f"{name}.path: file not found: {path}")
    else:
        errors.append(f"{name}.kind: unknown kind {kind!r}")
    return errors


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def profile_function(spec, n, name="target"):
    """Midpoint projection of a target/initial profile"""
    kind = spec["kind"]
    if kind == "zero":
        return GridFunction.zeros(n)
    if kind == "sine":
        k = spec.get("k", 1)
        return GridFunction.sample(lambda xi: np.sin(k * np.pi * xi), n)
    if kind == "gauss":
        center, width = spec["center"], spec["width"]
        return GridFunction.sample(lambda xi: np.exp(-0.5 * ((xi - center) / width) ** 2), n)
    try:
        x = read_grid_function_csv(spec["path"])
    except (ValueError, IndexError, DimensionMismatch) as e:
        raise ConfigInvalid([f"{name}.path: unreadable grid function CSV ({e})"])
    if x.n != n:
        raise ConfigInvalid([f"{name}.path: expected {n} cells, found {x.n}"])
    return x


@dataclass
class TransportConfig:
    n: int
    T: float
    m_profile: dict
    target: dict
    steering: SteeringOptions = field(default_factory=SteeringOptions)
    seed: int = 0
    output_dir: str = "out"
    initial: dict = field(default_factory=lambda: {"kind": "zero"})
    control_amplitude: float = 0.0

    @classmethod
    def from_dict(cls, data, defaults=None):
        merged = dict(defaults or {})
        merged.update(data or {})
        errors = []

        known = set(cls.__dataclass_fields__)
        errors += [f"{key}: unknown field" for key in sorted(set(merged) - known)]
        for key in ("n", "T", "m_profile", "target"):
            if key not in merged:
                errors.append(f"{key}: required")
        if errors:
            raise ConfigInvalid(errors)

        n, T = merged["n"], merged["T"]
        if not isinstance(n, int) or isinstance(n, bool) or n < MIN_CELLS:
            errors.append(f"n: must be an integer >= {MIN_CELLS}")
        if not _is_number(T) or T <= 0:
            errors.append("T: must be a positive number")
        elif isinstance(n, int) and abs(T * n - round(T * n)) > 1e-9:
            errors.append("T: T * n must be an integer (time grid aligned with cells)")

        m_profile = merged["m_profile"]
        if not isinstance(m_profile, dict) or m_profile.get("kind") not in ("constant", "table"):
            errors.append("m_profile.kind: must be 'constant' or 'table'")
        elif m_profile["kind"] == "constant":
            value = m_profile.get("value", 1.0)
            if not _is_number(value) or value < 0:
                errors.append("m_profile.value: must be a number >= 0")
        else:
            values = m_profile.get("values")
            if not isinstance(values, list) or (isinstance(n, int) and len(values) != n):
                errors.append(f"m_profile.values: must be a list of n={n} numbers")
            elif not all(_is_number(v) for v in values):
                errors.append("m_profile.values: entries must be numbers")
            elif min(values) < 0:
                errors.append("m_profile.values: entries must be >= 0")

        errors += _profile_errors("target", merged["target"], n)
        errors += _profile_errors("initial", merged.get("initial", {"kind": "zero"}), n, True)
        if not isinstance(merged.get("seed", 0), int):
            errors.append("seed: must be an integer")
        if not _is_number(merged.get("control_amplitude", 0.0)):
            errors.append("control_amplitude: must be a number")

        steering = merged.get("steering", {})
        if not isinstance(steering, SteeringOptions):
            try:
                steering = SteeringOptions.from_dict(steering)
            except ConfigInvalid as e:
                errors += e.errors
        if errors:
            raise ConfigInvalid(errors)
        merged["steering"] = steering
        merged["output_dir"] = str(merged.get("output_dir", "out"))
        return cls(**merged)

    def m_values(self):
        if self.m_profile["kind"] == "constant":
            return np.full(self.n, float(self.m_profile.get("value", 1.0)))
        return np.array(self.m_profile["values"], dtype=float)


@dataclass
class TransportModel:
    config: TransportConfig
    semigroup: SemigroupHandle
    control_operator: MultiplicationOperator
    nonlinearity: TransportNonlinearity
    grid: TimeGrid
    target: GridFunction
    initial: GridFunction

    @property
    def n(self):
        return self.config.n

    @property
    def xi(self):
        return midpoints(self.n)

    def metadata(self):
        return {
            "n": self.n,
            "T": self.grid.T,
            "nt": self.grid.nt,
            "dt": self.grid.dt,
            "rho_truncation_bound": self.nonlinearity.spec.truncation_bound(),
            "f_bound": self.nonlinearity.spec.bound(),
        }


def build_transport_model(cfg, defaults=None):
    if not isinstance(cfg, TransportConfig):
        cfg = TransportConfig.from_dict(cfg, defaults)
    try:
        grid = TimeGrid.aligned(cfg.T, cfg.n)
    except ControllabilityError as e:
        raise ConfigInvalid([f"T: {e.message}"])
    return TransportModel(
        config=cfg,
        semigroup=SemigroupHandle.shift(),
        control_operator=MultiplicationOperator(cfg.m_values()),
        nonlinearity=TransportNonlinearity(cfg.n),
        grid=grid,
        target=profile_function(cfg.target, cfg.n),
        initial=profile_function(cfg.initial, cfg.n, "initial"),
    )


# ------------------------------------------------------------------------------
# Experiments
# ------------------------------------------------------------------------------


def smooth_state(n, rng, modes=4):
    """Random combination of the first sine modes with decaying amplitudes"""
    k = np.arange(1, modes + 1)
    amplitudes = rng.standard_normal(modes) / k
    return amplitudes @ np.sin(np.pi * np.outer(k, midpoints(n)))


def steer_transport(model):
    return steer(
        model.semigroup,
        model.control_operator,
        model.nonlinearity,
        model.target,
        model.grid,
        model.config.steering,
    )


def lipschitz_sweep(n, m_max):
    """Ratios ||f(x_m) - f(0)|| / ||x_m|| for m = 4, 16, 64, ... and m_max"""
    if m_max < 1:
        raise ConfigInvalid(["m_max: must be at least 1"])
    ms = [4 ** p for p in range(1, 64) if 4 ** p < m_max] + [int(m_max)]
    rho = NonlinearitySpec(n).rho
    rows = []
    for m in ms:
        report = lipschitz_ratio_probe(rho, [lipschitz_witness(m, n)])
        rows.append({"m": m, "ratio": report.estimate, "sqrt_m": math.sqrt(m)})
    ratios = [row["ratio"] for row in rows]
    return ProbeReport(
        max(ratios),
        lipschitz_witness(ms[-1], n),
        len(rows),
        label="Lipschitz ratio at y = 0",
        details={"n": n, "ratios": rows, "monotone": bool(np.all(np.diff(ratios) > 0))},
    )


def dissipativity_probe(n, pairs, seed):
    """One-sided Lipschitz constant of f over seeded pairs in l2 coordinates"""
    if pairs < 1:
        raise ConfigInvalid(["pairs: must be at least 1"])
    rho = NonlinearitySpec(n).rho
    report = estimate_one_sided_constant(rho, random_pairs(n, seed, -2.0, 2.0), pairs, seed)
    report.details = {"n": n}
    return report


def condensing_probe(n, sets, nblocks, seed, t=0.25, size=5):
    """Covering-proxy ratio of Q(t) over random sets of smooth states"""
    if sets < 1 or nblocks < 1:
        raise ConfigInvalid(["sets, nblocks: must be at least 1"])
    S = SemigroupHandle.shift()
    S.cells(t, n)
    rng = np.random.default_rng(seed)
    scale = math.sqrt(1.0 / n)
    samples = [
        FinitePointSet([scale * smooth_state(n, rng) for _ in range(size)]) for _ in range(sets)
    ]
    report = condensing_ratio(lambda a: S.apply(t, a), samples, nblocks, bound=SHIFT_CONDENSING_BOUND)
    report.seed = seed
    report.details.update(shift_time=t, set_size=size)
    return report
