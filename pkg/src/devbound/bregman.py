"""Bregman divergences, the hard k-means cost, and a Lloyd-style fitter.

A divergence spec carries certified curvature constants (r1, r2) sandwiching
B_f between quadratics:

    (r1/2) ||x-y||^2  <=  B_f(x,y)  <=  r2 ||x-y||^2.

The lower constant is the provable strong-convexity form (the factor 1/2 is
required for consistency with the squared-Euclidean case r1 = r2 = 2, where
B_f(x,y) = ||x-y||^2 exactly); bound formulas downstream consume r1 and r2
verbatim.

Shipped specs: squared Euclidean, and quadratic forms f(x) = x'Ax with A
symmetric positive definite (r1 = 2 lambda_min, r2 = 2 lambda_max under l2).
User-supplied specs must carry their own certified constants.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgumentError, NumericError
from .linalg import jacobi_eigh

_NEG_ROUNDOFF_TOL = 1e-9


@dataclass(frozen=True)
class BregmanSpec:
    """Convex function with gradient and certified constants 0 < r1 <= r2.

    ``batch_fn(X, y)``, when provided, evaluates B_f(x, y) for all rows x of
    X against a single y in one vectorized call; shipped specs use direct
    forms there (e.g. ||x-y||^2) that avoid the cancellation of the generic
    three-term formula.
    """

    name: str
    f: Callable
    grad: Callable
    r1: float
    r2: float
    norm: str = "l2"
    batch_fn: Optional[Callable] = None

    def __post_init__(self):
        if not (0.0 < self.r1 <= self.r2):
            raise InvalidArgumentError(f"need 0 < r1 <= r2, got r1={self.r1}, r2={self.r2}")

    def batch_divergence(self, xs, y):
        """B_f(x, y) for every row x of xs against one center y."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        y = np.asarray(y, dtype=float)
        if self.batch_fn is not None:
            return np.asarray(self.batch_fn(xs, y), dtype=float)
        gy = np.asarray(self.grad(y), dtype=float)
        fy = float(self.f(y))
        vals = np.array([float(self.f(x)) - fy - float(np.dot(gy, x - y)) for x in xs])
        return vals


def squared_euclidean():
    """f(x) = ||x||_2^2, the vanilla k-means divergence; r1 = r2 = 2."""
    return BregmanSpec(
        name="squared_euclidean",
        f=lambda x: float(np.dot(x, x)),
        grad=lambda x: 2.0 * np.asarray(x, dtype=float),
        r1=2.0,
        r2=2.0,
        norm="l2",
        batch_fn=lambda xs, y: np.sum((xs - y) ** 2, axis=1),
    )


def quadratic_form(a):
    """f(x) = x'Ax for symmetric positive definite A; r1 = 2 lmin, r2 = 2 lmax."""
    a = np.asarray(a, dtype=float)
    w, _ = jacobi_eigh(a)
    if w[0] <= 0.0:
        raise InvalidArgumentError("quadratic_form requires a positive definite matrix")
    return BregmanSpec(
        name="quadratic_form",
        f=lambda x, _a=a: float(x @ _a @ x),
        grad=lambda x, _a=a: 2.0 * (_a @ np.asarray(x, dtype=float)),
        r1=2.0 * float(w[0]),
        r2=2.0 * float(w[-1]),
        norm="l2",
        batch_fn=lambda xs, y, _a=a: np.sum(((xs - y) @ _a) * (xs - y), axis=1),
    )


@dataclass(frozen=True)
class CenterSet:
    """At most k centers; the budget k travels with the set."""

    centers: np.ndarray
    k: int

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if centers.size == 0:
            raise InvalidArgumentError("CenterSet requires at least one center")
        if centers.shape[0] > self.k:
            raise InvalidArgumentError(
                f"{centers.shape[0]} centers exceed budget k={self.k}"
            )
        if not np.all(np.isfinite(centers)):
            raise InvalidArgumentError("centers must be finite")
        object.__setattr__(self, "centers", centers)

    def __len__(self):
        return self.centers.shape[0]


def divergence(spec, x, y):
    """B_f(x, y) = f(x) - f(y) - <grad f(y), x - y>; nonnegative for convex f."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    val = float(spec.batch_divergence(x[None, :], y)[0])
    if not np.isfinite(val):
        raise NumericError(f"divergence evaluated to non-finite value {val}")
    if val < 0.0:
        scale = 1.0 + abs(float(spec.f(x))) + abs(float(spec.f(y)))
        if val >= -_NEG_ROUNDOFF_TOL * scale:
            return 0.0
        raise NumericError(f"divergence {val} < 0: spec is not convex")
    return val


def hard_cost(spec, center_set, x):
    """min over centers p of B_f(x, p); ties broken by lowest index."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(hard_cost_many(spec, center_set, x[None, :])[0])


def hard_cost_many(spec, center_set, xs):
    """Vectorized hard cost of many points against one center set."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if len(center_set) == 0:
        raise InvalidArgumentError("hard cost needs a nonempty center set")
    costs = spec.batch_divergence(xs, center_set.centers[0])
    for p in center_set.centers[1:]:
        costs = np.minimum(costs, spec.batch_divergence(xs, p))
    return costs


def mean_cost(spec, center_set, sample):
    """Arithmetic mean of the hard cost over the sample (the empirical cost)."""
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if sample.size == 0:
        raise InvalidArgumentError("mean_cost requires a nonempty sample")
    return float(np.mean(hard_cost_many(spec, center_set, sample)))


def is_feasible(spec, center_set, sample, c):
    """Membership in the feasible class: |P| <= k and mean cost <= c."""
    if len(center_set) > center_set.k:
        return False
    return mean_cost(spec, center_set, sample) <= c


def assign(spec, centers, sample):
    """Index of the nearest center (by B_f) for each sample point."""
    costs = np.stack([spec.batch_divergence(sample, p) for p in centers])
    return np.argmin(costs, axis=0), np.min(costs, axis=0)


def _seed_centers(spec, sample, k, rng):
    # distance-weighted seeding on B_f (the ++-style rule)
    n = sample.shape[0]
    idx = [int(rng.integers(n))]
    dist = spec.batch_divergence(sample, sample[idx[0]])
    for _ in range(1, k):
        total = float(np.sum(dist))
        if total <= 0.0:
            cand = int(rng.integers(n))
        else:
            cand = int(rng.choice(n, p=dist / total))
        idx.append(cand)
        dist = np.minimum(dist, spec.batch_divergence(sample, sample[cand]))
    return sample[np.array(idx)].copy()


def _lloyd_single(spec, sample, k, max_iters, rng):
    centers = _seed_centers(spec, sample, k, rng)
    history = []
    for _ in range(max_iters):
        labels, costs = assign(spec, centers, sample)
        # reseed empty clusters at the currently worst-served point
        for j in range(k):
            if not np.any(labels == j):
                worst = int(np.argmax(costs))
                centers[j] = sample[worst]
                labels, costs = assign(spec, centers, sample)
        history.append(float(np.mean(costs)))
        new_centers = centers.copy()
        for j in range(k):
            members = sample[labels == j]
            if members.shape[0] > 0:
                # the Bregman right-centroid of a cloud is its arithmetic mean
                new_centers[j] = members.mean(axis=0)
        if np.array_equal(new_centers, centers):
            break
        centers = new_centers
    _, costs = assign(spec, centers, sample)
    history.append(float(np.mean(costs)))
    return centers, history


def lloyd_restarts(spec, sample, k, restarts=8, max_iters=64, seed=0):
    """Run seeded Lloyd restarts; returns [(CenterSet, cost, history), ...].

    Restart r uses the stream (seed, r), so individual restarts are
    reproducible regardless of how many run.
    """
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if sample.shape[0] < k:
        raise InvalidArgumentError(
            f"sample size {sample.shape[0]} below number of centers k={k}"
        )
    out = []
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), r]))
        centers, history = _lloyd_single(spec, sample, k, max_iters, rng)
        out.append((CenterSet(centers=centers, k=k), history[-1], history))
    return out


def lloyd_fit(spec, sample, k, restarts=8, max_iters=64, seed=0):
    """Best-of-restarts Lloyd centers; deterministic given seed.

    The per-iteration cost is non-increasing within each restart; the best
    restart wins, ties broken by lowest restart index.
    """
    runs = lloyd_restarts(spec, sample, k, restarts=restarts, max_iters=max_iters, seed=seed)
    best = min(range(len(runs)), key=lambda i: (runs[i][1], i))
    return runs[best][0]
