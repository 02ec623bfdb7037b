"""
Nonsmooth-analysis probes on finite-dimensional samples.

Vectors here are plain numpy arrays with the Euclidean inner product. Grid
functions are passed through their l2 coordinates (utils.space.p_forward),
which is an exact isometry, so every quantity below equals its L2(0,1)
counterpart.

The Kuratowski measure of any finite set is 0, so the measure is replaced by
the fixed-block covering proxy alpha_n: the smallest achievable maximum block
diameter over partitions of the set into at most n blocks. All reported
values are proxies.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy.optimize import nnls
from scipy.spatial.distance import pdist, squareform

from utils.errors import DegeneratePair, DegenerateSet, ZeroScale

logger = logging.getLogger(__name__)

# Largest set handled by the exact partition search
EXACT_LIMIT = 14
DEGENERATE_PAIR_TOL = 1e-14
DEGENERATE_SET_TOL = 1e-12


def _listify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (list, tuple)):
        return [_listify(item) for item in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass
class ProbeReport:
    estimate: float
    witness: Any
    samples: int
    seed: Optional[int] = None
    label: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self):
        data = {
            "estimate": float(self.estimate),
            "witness": _listify(self.witness),
            "samples": int(self.samples),
            "seed": self.seed,
        }
        if self.label:
            data["label"] = self.label
        data.update(_listify(self.details))
        return data


@dataclass(frozen=True, eq=False)
class FinitePointSet:
    points: np.ndarray
    dim: int = None

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.size == 0:
            dim = self.dim if self.dim is not None else 0
            points = points.reshape(0, dim)
        elif points.ndim == 1:
            points = points.reshape(-1, 1)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dim", points.shape[1])

    def __len__(self):
        return self.points.shape[0]

    def map(self, fn):
        if len(self) == 0:
            return self
        return FinitePointSet(np.array([fn(p) for p in self.points]))

    def union(self, other):
        return FinitePointSet(np.vstack([self.points, other.points]))

    def minkowski_sum(self, other):
        return FinitePointSet(
            (self.points[:, None, :] + other.points[None, :, :]).reshape(-1, self.dim)
        )


# ------------------------------------------------------------------------------
# Brackets and one-sided Lipschitz constants
# ------------------------------------------------------------------------------


def bracket(x, y, side="plus"):
    """Norm-derivative bracket [x, y]+- in a real inner product space"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    norm_x = np.linalg.norm(x)
    if norm_x == 0.0:
        norm_y = float(np.linalg.norm(y))
        return norm_y if side == "plus" else -norm_y
    return float(np.dot(x, y) / norm_x)


def bracket_quotient(x, y, side="plus", h=1e-7):
    """One-sided difference quotient (||x + hy|| - ||x||)/h"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    step = h if side == "plus" else -h
    return float((np.linalg.norm(x + step * y) - np.linalg.norm(x)) / step)


def random_pairs(dim, seed, low=-1.0, high=1.0):
    """Endless stream of uniformly sampled pairs (x, y)"""
    rng = np.random.default_rng(seed)
    while True:
        yield rng.uniform(low, high, dim), rng.uniform(low, high, dim)


def _pair_difference(x, y):
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    dist = np.linalg.norm(diff)
    if dist <= DEGENERATE_PAIR_TOL:
        raise DegeneratePair("Sampled pair coincides", distance=float(dist))
    return diff, dist


def estimate_one_sided_constant(fmap, sampler, count, seed=None):
    """max <x - y, f(x) - f(y)> / ||x - y||^2 over count sampled pairs"""
    if count < 1:
        raise ValueError("count must be positive")
    best, witness = -np.inf, None
    for _, (x, y) in zip(range(count), sampler):
        diff, dist = _pair_difference(x, y)
        value = float(np.dot(diff, fmap(x) - fmap(y)) / dist ** 2)
        if value > best:
            best, witness = value, (np.array(x), np.array(y))
    logger.debug("One-sided constant estimate %.3e over %d pairs", best, count)
    return ProbeReport(best, witness, count, seed, label="one-sided Lipschitz")


def lipschitz_ratio_probe(fmap, pairs, seed=None):
    """max ||f(x) - f(y)|| / ||x - y|| over the pair stream"""
    best, witness, samples = -np.inf, None, 0
    for x, y in pairs:
        _, dist = _pair_difference(x, y)
        value = float(np.linalg.norm(fmap(x) - fmap(y)) / dist)
        samples += 1
        if value > best:
            best, witness = value, (np.array(x), np.array(y))
    if samples == 0:
        raise ValueError("pair stream is empty")
    return ProbeReport(best, witness, samples, seed, label="Lipschitz ratio")


# ------------------------------------------------------------------------------
# Covering proxy of the Kuratowski measure
# ------------------------------------------------------------------------------


@dataclass
class CoverEstimate:
    value: float
    labels: list
    exact: bool


def diameter(points):
    points = points if isinstance(points, FinitePointSet) else FinitePointSet(points)
    if len(points) < 2:
        return 0.0
    return float(pdist(points.points).max())


def _block_diameter(distances, labels, nblocks):
    labels = np.asarray(labels)
    value = 0.0
    for block in range(nblocks):
        members = np.flatnonzero(labels == block)
        if members.size > 1:
            value = max(value, float(distances[np.ix_(members, members)].max()))
    return value


def _assign_blocks(conflicts, nblocks):
    """First partition (in lexicographic label order) avoiding all conflicts"""
    size = len(conflicts)
    labels = [-1] * size

    def place(i, used):
        if i == size:
            return True
        for block in range(min(used + 1, nblocks)):
            if any(labels[j] == block for j in conflicts[i]):
                continue
            labels[i] = block
            if place(i + 1, max(used, block + 1)):
                return True
        labels[i] = -1
        return False

    return labels if place(0, 0) else None


def _exact_cover(distances, nblocks):
    size = distances.shape[0]
    candidates = np.unique(np.concatenate([[0.0], distances[np.triu_indices(size, 1)]]))
    lo, hi = 0, candidates.size - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        threshold = candidates[mid]
        conflicts = [
            [j for j in range(i) if distances[i, j] > threshold] for i in range(size)
        ]
        labels = _assign_blocks(conflicts, nblocks)
        if labels is None:
            lo = mid + 1
        else:
            best = labels
            hi = mid - 1
    return best


def _greedy_cover(distances, nblocks):
    """Farthest-point clustering; an upper bound on the exact proxy"""
    centers = [0]
    nearest = distances[0].copy()
    while len(centers) < nblocks:
        candidate = int(np.argmax(nearest))
        if nearest[candidate] == 0.0:
            break
        centers.append(candidate)
        nearest = np.minimum(nearest, distances[candidate])
    return np.argmin(distances[:, centers], axis=1).tolist()


def cover_partition(points, nblocks):
    points = points if isinstance(points, FinitePointSet) else FinitePointSet(points)
    if nblocks < 1:
        raise ValueError("nblocks must be positive")
    size = len(points)
    if size <= nblocks:
        return CoverEstimate(0.0, list(range(size)), True)
    distances = squareform(pdist(points.points))
    if size <= EXACT_LIMIT:
        labels = _exact_cover(distances, nblocks)
        exact = True
    else:
        labels = _greedy_cover(distances, nblocks)
        exact = False
        logger.debug("Set of %d points exceeds exact limit; using greedy bound", size)
    return CoverEstimate(_block_diameter(distances, labels, nblocks), labels, exact)


def kuratowski_n(points, nblocks):
    return cover_partition(points, nblocks).value


def condensing_ratio(fmap, sets, nblocks, bound=None):
    """max over sets of alpha_n(f(A)) / alpha_n(A)"""
    sets = list(sets)
    if not sets:
        raise ValueError("no sets to evaluate")
    best, witness = -np.inf, None
    for index, points in enumerate(sets):
        points = points if isinstance(points, FinitePointSet) else FinitePointSet(points)
        denominator = kuratowski_n(points, nblocks)
        if denominator <= DEGENERATE_SET_TOL:
            raise DegenerateSet(
                "Covering proxy of a sampled set vanishes", index=index, value=denominator
            )
        ratio = kuratowski_n(points.map(fmap), nblocks) / denominator
        if ratio > best:
            best, witness = ratio, index
    details = {"nblocks": nblocks, "proxy": True}
    if bound is not None:
        details.update(bound=bound, within_bound=bool(best <= bound))
    return ProbeReport(best, witness, len(sets), label="condensing ratio", details=details)


# ------------------------------------------------------------------------------
# Convex hull membership
# ------------------------------------------------------------------------------


def project_simplex(w):
    """Euclidean projection onto the probability simplex"""
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    index = np.arange(1, w.size + 1)
    rho = np.nonzero(u - css / index > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(w - theta, 0.0)


def hull_membership(point, anchor, scale, samples, tol, max_iter=10_000):
    """Whether (point - anchor)/scale lies within tol of conv(samples U {0})"""
    if scale <= 0:
        raise ZeroScale("Hull scale must be positive", scale=scale)
    samples = samples if isinstance(samples, FinitePointSet) else FinitePointSet(samples)
    target = (np.asarray(point, dtype=float) - np.asarray(anchor, dtype=float)) / scale
    if np.linalg.norm(target) <= tol:
        return True
    if len(samples) == 0:
        return False

    # Vertices as columns, the origin last
    vertices = np.hstack([samples.points.T, np.zeros((samples.dim, 1))])
    radius = float(np.linalg.norm(vertices, axis=0).max())

    # Penalized active-set solve; its residual never exceeds the true distance
    weight = 1e3 * (1.0 + radius)
    system = np.vstack([vertices, weight * np.ones((1, vertices.shape[1]))])
    w, residual = nnls(system, np.concatenate([target, [weight]]))
    if residual > tol:
        return False
    w = w / w.sum()
    r = vertices @ w - target
    if np.linalg.norm(r) <= tol:
        return True

    # Projected gradient with the Frank-Wolfe gap as a lower-bound certificate
    lipschitz = max(np.linalg.norm(vertices, 2) ** 2, np.finfo(float).tiny)
    for _ in range(max_iter):
        grad = vertices.T @ r
        objective = 0.5 * float(r @ r)
        gap = float(grad @ w - grad.min())
        if np.sqrt(2.0 * objective) <= tol:
            return True
        if objective - gap > 0.5 * tol ** 2:
            return False
        if gap < tol / 10:
            break
        w = project_simplex(w - grad / lipschitz)
        r = vertices @ w - target
    return bool(np.linalg.norm(r) <= tol)


# ------------------------------------------------------------------------------
# Convexity diagnostic
# ------------------------------------------------------------------------------


def convexity_probe(curve, a, b, count, seed):
    """Largest componentwise midpoint-convexity violation of s -> curve(s)

    curve((s1 + s2)/2) <= (curve(s1) + curve(s2))/2 in the componentwise
    order; the estimate is max over sampled segments of the positive part of
    the violation (0 means no violation was seen).
    """
    rng = np.random.default_rng(seed)
    best, witness = 0.0, None
    for _ in range(count):
        s1, s2 = rng.uniform(a, b, 2)
        gap = np.asarray(curve(0.5 * (s1 + s2))) - 0.5 * (
            np.asarray(curve(s1)) + np.asarray(curve(s2))
        )
        violation = float(np.max(gap, initial=0.0))
        if violation > best:
            best, witness = violation, (float(s1), float(s2))
    return ProbeReport(best, witness, count, seed, label="midpoint convexity")
