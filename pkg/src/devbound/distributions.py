"""Seeded samplers with certified moment profiles, plus population costs.

Every sampler is deterministic given (seed, stream): the generator is always
``np.random.default_rng(np.random.SeedSequence([seed, stream]))``, so draws
for different purposes (data, probes, evaluation) come from provably
disjoint streams of one master seed.

Certified moment bounds per kind:

* gaussian (standard, d-dim): E||X||^l = 2^{l/2} G((d+l)/2)/G(d/2) exactly.
* student_t (spherical multivariate, nu d.o.f.): for l < nu,
  E||X||^l = nu^{l/2} G((d+l)/2) G((nu-l)/2) / (G(d/2) G(nu/2)).
* two_point {-1,+1}: every central moment equals 1.
* shifted_pareto(a) (unit-scale Pareto recentred to mean zero, d = 1): even
  central moments by binomial expansion of exact raw moments; odd orders are
  dominated through the Lyapunov bound E|Y|^l <= (E|Y|^{l+1})^{l/(l+1)}.
* gmm_ground_truth: the Minkowski bound
  (E||X - mean||^l)^{1/l} <= sum-weighted(||mu_i - mean|| +
  sqrt(lmax(S_i)) chi_l), a certified upper bound rather than the exact
  moment.

M is a uniform upper bound on orders 1..p, which is all any formula here
consumes; upper-bounding certifications are therefore sound.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import bregman as _bregman
from . import gmm as _gmm
from .errors import InvalidArgumentError, UnsupportedOrderError
from .linalg import jacobi_eigh
from .moments import MomentProfile

KINDS = ("gaussian", "student_t", "shifted_pareto", "gmm_ground_truth", "two_point")


def stream_rng(seed, stream=0):
    """The package-wide stream-splitting rule."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream)]))


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    d: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unsupported distribution kind {self.kind!r}")

    def mean(self):
        if self.kind == "gmm_ground_truth":
            gp = self.params["gmm"]
            return np.sum(gp.weights[:, None] * gp.means, axis=0)
        return np.zeros(self.d)


def gaussian(d=1):
    return DistributionSpec(kind="gaussian", d=d)


def student_t(nu, d=1):
    if nu <= 2:
        raise InvalidArgumentError("student_t requires nu > 2 for a finite cost")
    return DistributionSpec(kind="student_t", d=d, params={"nu": float(nu)})


def shifted_pareto(a):
    if a <= 2:
        raise InvalidArgumentError("shifted_pareto requires a > 2 for a finite cost")
    return DistributionSpec(kind="shifted_pareto", d=1, params={"a": float(a)})


def two_point():
    return DistributionSpec(kind="two_point", d=1)


def gmm_ground_truth(params):
    return DistributionSpec(kind="gmm_ground_truth", d=params.d,
                            params={"gmm": params})


def draw(dist, m, seed, stream=0):
    """m seeded draws as an (m, d) array; byte-identical across reruns."""
    if m < 1:
        raise InvalidArgumentError(f"m must be >= 1, got {m}")
    rng = stream_rng(seed, stream)
    if dist.kind == "gaussian":
        return rng.standard_normal((m, dist.d))
    if dist.kind == "student_t":
        nu = dist.params["nu"]
        z = rng.standard_normal((m, dist.d))
        w = rng.chisquare(nu, m)
        return z * np.sqrt(nu / w)[:, None]
    if dist.kind == "two_point":
        return (rng.integers(0, 2, size=m) * 2.0 - 1.0)[:, None]
    if dist.kind == "shifted_pareto":
        a = dist.params["a"]
        x = rng.pareto(a, m) + 1.0
        return (x - a / (a - 1.0))[:, None]
    if dist.kind == "gmm_ground_truth":
        gp = dist.params["gmm"]
        comp = rng.choice(gp.n_components, p=gp.weights, size=m)
        z = rng.standard_normal((m, dist.d))
        out = np.empty((m, dist.d))
        chols = [np.linalg.cholesky(cov) for cov in gp.covariances]
        for i in range(gp.n_components):
            mask = comp == i
            out[mask] = gp.means[i] + z[mask] @ chols[i].T
        return out
    raise InvalidArgumentError(f"unsupported distribution kind {dist.kind!r}")


def _chi_moment(d, l):
    # E ||N(0, I_d)||^l; exact product for even l, lgamma otherwise
    if l % 2 == 0:
        out = 1.0
        for j in range(l // 2):
            out *= d + 2 * j
        return out
    return math.exp(0.5 * l * math.log(2.0)
                    + math.lgamma((d + l) / 2.0) - math.lgamma(d / 2.0))


def _student_norm_moment(nu, d, l):
    # E ||X||^l for spherical multivariate t, l < nu
    if l % 2 == 0:
        out = _chi_moment(d, l)
        for j in range(1, l // 2 + 1):
            out *= nu / (nu - 2 * j)
        return out
    return math.exp(0.5 * l * math.log(nu)
                    + math.lgamma((d + l) / 2.0) + math.lgamma((nu - l) / 2.0)
                    - math.lgamma(d / 2.0) - math.lgamma(nu / 2.0))


def _pareto_central_even(a, l):
    # E (X - mu)^l for unit-scale Pareto, l even, l < a; mu = a/(a-1)
    mu = a / (a - 1.0)
    total = 0.0
    for j in range(l + 1):
        raw = a / (a - j)  # E X^j
        total += math.comb(l, j) * raw * (-mu) ** (l - j)
    return total


def certified_moment(dist, p):
    """Analytic moment profile of order p (errors when moments do not exist)."""
    if p < 2 or p % 2 != 0:
        raise InvalidArgumentError(f"p must be even and >= 2, got {p}")
    if dist.kind == "two_point":
        return MomentProfile(p=p, M=1.0, center=np.zeros(1))
    if dist.kind == "gaussian":
        M = max(_chi_moment(dist.d, l) for l in range(1, p + 1))
        return MomentProfile(p=p, M=M, center=np.zeros(dist.d))
    if dist.kind == "student_t":
        nu = dist.params["nu"]
        if nu <= p:
            raise UnsupportedOrderError(
                f"student_t(nu={nu}) has no order-{p} moment (needs nu > p)")
        M = max(_student_norm_moment(nu, dist.d, l) for l in range(1, p + 1))
        return MomentProfile(p=p, M=M, center=np.zeros(dist.d))
    if dist.kind == "shifted_pareto":
        a = dist.params["a"]
        if a <= p:
            raise UnsupportedOrderError(
                f"shifted_pareto(a={a}) has no order-{p} moment (needs a > p)")
        evens = {l: _pareto_central_even(a, l) for l in range(2, p + 1, 2)}
        bounds = []
        for l in range(1, p + 1):
            if l % 2 == 0:
                bounds.append(evens[l])
            else:
                bounds.append(evens[l + 1] ** (l / (l + 1.0)))
        return MomentProfile(p=p, M=max(bounds), center=np.zeros(1))
    if dist.kind == "gmm_ground_truth":
        gp = dist.params["gmm"]
        center = dist.mean()
        shifts = np.linalg.norm(gp.means - center, axis=1)
        lmaxs = np.array([jacobi_eigh(cov)[0][-1] for cov in gp.covariances])
        bounds = []
        for l in range(1, p + 1):
            chi_l = _chi_moment(dist.d, l) ** (1.0 / l)
            per_comp = (shifts + np.sqrt(lmaxs) * chi_l) ** l
            bounds.append(float(np.sum(gp.weights * per_comp)))
        return MomentProfile(p=p, M=max(bounds), center=center)
    raise InvalidArgumentError(f"unsupported distribution kind {dist.kind!r}")


def export_samples_csv(xs, path):
    """Write a drawn sample to CSV, one point per row."""
    import csv

    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(xs.shape[1])])
        for row in xs:
            writer.writerow([repr(float(v)) for v in row])


def population_cost(dist, model, cost_kind, n_eval, seed, spec=None, stream=0):
    """Monte Carlo population cost of a model with its CLT standard error.

    ``cost_kind`` selects the hard clustering cost ("kmeans"/"bregman", with
    ``spec`` defaulting to squared Euclidean) or the mixture log-likelihood
    ("gmm").  Fresh draws come from (seed, stream).
    """
    xs = draw(dist, n_eval, seed, stream=stream)
    return population_cost_on(xs, model, cost_kind, spec=spec)


def population_cost_on(xs, model, cost_kind, spec=None):
    """Cost mean and standard error over an already-drawn evaluation sample."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if cost_kind in ("kmeans", "bregman"):
        spec = spec or _bregman.squared_euclidean()
        vals = _bregman.hard_cost_many(spec, model, xs)
    elif cost_kind == "gmm":
        vals = _gmm.mixture_cost_many(model, xs)
    else:
        raise InvalidArgumentError(f"unknown cost kind {cost_kind!r}")
    n = xs.shape[0]
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return float(np.mean(vals)), se
