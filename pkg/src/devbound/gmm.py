"""Bounded-spectrum Gaussian mixtures: log-likelihood cost, restriction, EM.

All density arithmetic stays in log space (log-sum-exp across components):
with sigma1 small the raw densities overflow long before the logs do.  Every
covariance is constrained to eigenvalues in [sigma1, sigma2]; the fitter
enforces this after every M-step, by default projecting eigenvalues onto the
interval (the alternative of discarding the offending update is selectable).

Partial mixtures (weights summing to less than one) are first-class values:
the restriction operator keeps exactly the components whose means lie in a
ball and deliberately does not renormalize.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError
from .linalg import is_symmetric, jacobi_eigh

_SPECTRUM_TOL = 1e-9
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GmmParams:
    """Mixture parameters with spectrum certificate sigma1 I <= Sigma_i <= sigma2 I.

    A full mixture has weights on the simplex; ``partial=True`` relaxes the
    sum to <= 1 (restriction output).  ``k`` is the component budget.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    sigma1: float
    sigma2: float
    k: int = 0
    partial: bool = False

    def __post_init__(self):
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        n = weights.shape[0]
        if n == 0:
            means = np.zeros((0, 1))
            covs = np.zeros((0, 1, 1))
        else:
            means = np.atleast_2d(np.asarray(self.means, dtype=float))
            covs = np.asarray(self.covariances, dtype=float)
            if covs.ndim == 2:
                covs = covs[None, :, :]
        if not (0.0 < self.sigma1 <= self.sigma2):
            raise InvalidArgumentError("need 0 < sigma1 <= sigma2")
        if n != means.shape[0] or n != covs.shape[0]:
            raise InvalidArgumentError("weights, means, covariances must align")
        if np.any(weights < 0.0):
            raise InvalidArgumentError("weights must be nonnegative")
        total = float(np.sum(weights))
        if self.partial:
            if total > 1.0 + 1e-9:
                raise InvalidArgumentError(f"partial mixture mass {total} exceeds 1")
        elif n == 0 or abs(total - 1.0) > 1e-9:
            raise InvalidArgumentError(f"full mixture weights must sum to 1, got {total}")
        budget = self.k if self.k > 0 else n
        if n > budget:
            raise InvalidArgumentError(f"{n} components exceed budget k={budget}")
        for cov in covs:
            w, _ = jacobi_eigh(cov)
            lo, hi = float(w[0]), float(w[-1])
            tol = _SPECTRUM_TOL * max(1.0, self.sigma2)
            if lo < self.sigma1 - tol or hi > self.sigma2 + tol:
                raise InvalidArgumentError(
                    f"covariance spectrum [{lo:.6g}, {hi:.6g}] outside "
                    f"[{self.sigma1:.6g}, {self.sigma2:.6g}]"
                )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)
        object.__setattr__(self, "k", budget)

    @property
    def n_components(self):
        return self.weights.shape[0]

    @property
    def d(self):
        return self.means.shape[1] if self.n_components else 0

    @property
    def mass(self):
        return float(np.sum(self.weights))


def log_density(theta, x):
    """ln p_theta(x) for one Gaussian, evaluated entirely in log space."""
    mean, cov = theta
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(log_density_many(theta, x[None, :])[0])


def log_density_many(theta, xs):
    """ln p_theta for each row of xs (shared Cholesky factor)."""
    mean = np.atleast_1d(np.asarray(theta[0], dtype=float))
    cov = np.atleast_2d(np.asarray(theta[1], dtype=float))
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    d = mean.shape[0]
    if not is_symmetric(cov):
        raise InvalidArgumentError("covariance must be symmetric")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise InvalidArgumentError("covariance must be positive definite") from None
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    z = np.linalg.solve(chol, (xs - mean).T)
    quad = np.sum(z * z, axis=0)
    return -0.5 * (d * LOG_2PI + logdet + quad)


def component_log_densities(params, xs):
    """(n_components, n_points) matrix of per-component log densities."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    return np.stack(
        [log_density_many((params.means[i], params.covariances[i]), xs)
         for i in range(params.n_components)]
    )


def mixture_cost(params, x):
    """phi_g(x) = ln sum_i alpha_i p_i(x), via log-sum-exp."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(mixture_cost_many(params, x[None, :])[0])


def mixture_cost_many(params, xs):
    if params.n_components == 0 or params.mass <= 0.0:
        raise InvalidArgumentError("mixture cost needs at least one positive weight")
    active = params.weights > 0.0
    log_w = np.log(params.weights[active])
    log_p = component_log_densities(
        replace(params, weights=params.weights[active], means=params.means[active],
                covariances=params.covariances[active], partial=True, k=params.k),
        xs,
    )
    shifted = log_p + log_w[:, None]
    top = np.max(shifted, axis=0)
    return top + np.log(np.sum(np.exp(shifted - top[None, :]), axis=0))


def mean_loglik(params, sample):
    """Arithmetic mean of the mixture cost over the sample."""
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if sample.size == 0:
        raise InvalidArgumentError("mean_loglik requires a nonempty sample")
    return float(np.mean(mixture_cost_many(params, sample)))


def is_feasible_mog(params, sample, c, sigma1=None, sigma2=None, k=None):
    """Membership in the feasible mixture class at reference score c.

    Requires the spectrum certificate, at most k components, weights on the
    simplex, and mean log-likelihood <= c (boundary inclusive).  The class
    bounds default to the parameters' own declared spectrum and budget but
    may be narrowed explicitly.
    """
    s1 = params.sigma1 if sigma1 is None else sigma1
    s2 = params.sigma2 if sigma2 is None else sigma2
    budget = params.k if k is None else k
    if params.n_components == 0 or params.n_components > budget:
        return False
    if abs(params.mass - 1.0) > 1e-9:
        return False
    for cov in params.covariances:
        w, _ = jacobi_eigh(cov)
        tol = _SPECTRUM_TOL * max(1.0, s2)
        if w[0] < s1 - tol or w[-1] > s2 + tol:
            return False
    return mean_loglik(params, sample) <= c


def restrict(params, ball):
    """The restriction operator: keep components whose means lie in the ball.

    Weights are not renormalized, so the result is generally a partial
    mixture; an empty result is legal.
    """
    center, radius = ball
    center = np.atleast_1d(np.asarray(center, dtype=float))
    keep = np.array(
        [np.linalg.norm(mu - center) <= radius for mu in params.means], dtype=bool
    )
    return replace(
        params,
        weights=params.weights[keep],
        means=params.means[keep],
        covariances=params.covariances[keep],
        partial=True,
    )


def spectrum_project(sigma, sigma1, sigma2):
    """Clip the eigenvalues of a symmetric matrix into [sigma1, sigma2]."""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if not is_symmetric(sigma):
        raise InvalidArgumentError("spectrum_project requires a symmetric matrix")
    if not (0.0 < sigma1 <= sigma2):
        raise InvalidArgumentError("need 0 < sigma1 <= sigma2")
    w, v = jacobi_eigh(sigma)
    if np.all(w >= sigma1) and np.all(w <= sigma2):
        return sigma.copy()
    clipped = np.clip(w, sigma1, sigma2)
    out = v @ np.diag(clipped) @ v.T
    return 0.5 * (out + out.T)


def _seed_params(sample, k, sigma1, sigma2, rng):
    n, d = sample.shape
    first = int(rng.integers(n))
    idx = [first]
    dist = np.sum((sample - sample[first]) ** 2, axis=1)
    for _ in range(1, k):
        total = float(np.sum(dist))
        cand = int(rng.choice(n, p=dist / total)) if total > 0 else int(rng.integers(n))
        idx.append(cand)
        dist = np.minimum(dist, np.sum((sample - sample[cand]) ** 2, axis=1))
    means = sample[np.array(idx)].copy()
    base = np.cov(sample.T, ddof=0).reshape(d, d) if n > 1 else np.eye(d)
    cov = spectrum_project(0.5 * (base + base.T), sigma1, sigma2)
    covs = np.stack([cov.copy() for _ in range(k)])
    weights = np.full(k, 1.0 / k)
    return weights, means, covs


def _em_single(sample, k, sigma1, sigma2, max_iters, rng, update_rule, tol=1e-8):
    n, d = sample.shape
    weights, means, covs = _seed_params(sample, k, sigma1, sigma2, rng)
    history = []
    flags = []
    prev = -np.inf
    for _ in range(max_iters):
        params = GmmParams(weights=weights, means=means, covariances=covs,
                           sigma1=sigma1, sigma2=sigma2, k=k)
        log_p = component_log_densities(params, sample) + np.log(weights)[:, None]
        top = np.max(log_p, axis=0)
        log_mix = top + np.log(np.sum(np.exp(log_p - top[None, :]), axis=0))
        ll = float(np.mean(log_mix))
        history.append(ll)
        resp = np.exp(log_p - log_mix[None, :])
        counts = resp.sum(axis=1)
        fired = False
        for j in range(k):
            if not np.isfinite(counts[j]) or counts[j] < 1e-10 * n:
                # degenerate responsibilities: reseed at a random sample point
                means[j] = sample[int(rng.integers(n))]
                covs[j] = spectrum_project(np.eye(d) * 0.5 * (sigma1 + sigma2),
                                           sigma1, sigma2)
                weights = np.full(k, 1.0 / k)
                fired = True
        if fired:
            flags.append("reseed")
            prev = -np.inf
            continue
        weights = counts / n
        new_means = (resp @ sample) / counts[:, None]
        new_covs = np.empty_like(covs)
        projected = False
        for j in range(k):
            diff = sample - new_means[j]
            scatter = (resp[j][:, None] * diff).T @ diff / counts[j]
            scatter = 0.5 * (scatter + scatter.T)
            w_eig, _ = jacobi_eigh(scatter)
            in_range = w_eig[0] >= sigma1 - _SPECTRUM_TOL and w_eig[-1] <= sigma2 + _SPECTRUM_TOL
            if in_range:
                new_covs[j] = spectrum_project(scatter, sigma1, sigma2)
            elif update_rule == "project":
                new_covs[j] = spectrum_project(scatter, sigma1, sigma2)
                projected = True
            else:  # discard the offending covariance update
                new_covs[j] = covs[j]
                projected = True
        means = new_means
        covs = new_covs
        flags.append("project" if projected else "plain")
        if abs(ll - prev) <= tol * (1.0 + abs(ll)):
            break
        prev = ll
    params = GmmParams(weights=weights, means=means, covariances=covs,
                       sigma1=sigma1, sigma2=sigma2, k=k)
    history.append(mean_loglik(params, sample))
    return params, history, flags


def em_restarts(sample, k, sigma1, sigma2, restarts=4, max_iters=100, seed=0,
                update_rule="project"):
    """Seeded EM restarts; returns [(GmmParams, mean_loglik, history, flags), ...]."""
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if sample.shape[0] < k:
        raise InvalidArgumentError("sample size below number of components")
    if update_rule not in ("project", "discard"):
        raise InvalidArgumentError(f"unknown update rule {update_rule!r}")
    out = []
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), r]))
        params, history, flags = _em_single(
            sample, k, sigma1, sigma2, max_iters, rng, update_rule
        )
        out.append((params, history[-1], history, flags))
    return out


def em_fit(sample, k, sigma1, sigma2, restarts=4, max_iters=100, seed=0,
           update_rule="project"):
    """Best-of-restarts spectrum-constrained EM; deterministic given seed.

    The spectrum certificate holds after every iteration.  Log-likelihood is
    non-decreasing between iterations in which neither projection nor
    reseeding fired; iterations where the constraint bit is exempt.
    """
    runs = em_restarts(sample, k, sigma1, sigma2, restarts=restarts,
                       max_iters=max_iters, seed=seed, update_rule=update_rule)
    best = max(range(len(runs)), key=lambda i: (runs[i][1], -i))
    return runs[best][0]
