"""Moment-based concentration primitives.

Everything here is an elaboration of Chebyshev's inequality for a centered
map tau(x) = x - E X whose norm has all moments of order 1..p dominated by a
single constant M:

* ball-mass radii: ``Pr[||tau(X)|| > (M/eps)^(1/p)] <= eps``
* clipping radii: the ball of radius ``(M/eps)^(1/(p-k))`` leaves at most
  ``eps`` of the k-th moment outside
* a moment-only empirical-mean deviation bound
  ``sqrt(M p e / 2m) (2/delta)^(1/p)`` valid once ``m >= p/(Me)``.

A profile fitted from data centers at the sample mean; the true expectation
is unavailable, and reports label which center was used.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, PreconditionError

NORM_TAGS = ("l2", "l1", "linf")


def norm_value(x, tag="l2"):
    """Vector norm by tag; accepts a single d-vector or an (n, d) batch."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if tag == "l2":
        out = np.sqrt(np.sum(x * x, axis=-1))
    elif tag == "l1":
        out = np.sum(np.abs(x), axis=-1)
    elif tag == "linf":
        out = np.max(np.abs(x), axis=-1)
    else:
        raise InvalidArgumentError(f"unknown norm tag {tag!r}")
    return out if out.size > 1 else float(out[0])


@dataclass(frozen=True)
class MomentProfile:
    """Order-p moment certificate: E ||x - center||^l <= M for l = 1..p.

    A single scalar M bounds every order, which keeps the bound formulas
    verbatim.  ``center_kind`` records whether the center is the population
    expectation or a sample mean (the only option for fitted profiles).
    """

    p: int
    M: float
    center: np.ndarray
    norm: str = "l2"
    center_kind: str = "population"

    def __post_init__(self):
        if self.p < 2 or self.p % 2 != 0:
            raise InvalidArgumentError(f"profile order p must be even and >= 2, got {self.p}")
        if not (self.M >= 0.0):
            raise InvalidArgumentError(f"moment bound M must be >= 0, got {self.M}")
        if self.norm not in NORM_TAGS:
            raise InvalidArgumentError(f"unknown norm tag {self.norm!r}")
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        if not np.all(np.isfinite(center)):
            raise InvalidArgumentError("profile center must be finite")
        object.__setattr__(self, "center", center)

    @property
    def d(self):
        return self.center.shape[0]

    def centered_norms(self, sample):
        sample = np.atleast_2d(np.asarray(sample, dtype=float))
        return np.atleast_1d(norm_value(sample - self.center, self.norm))


def ball_radius(profile, eps):
    """Radius R = (M/eps)^(1/p) with Pr[||tau(X)|| <= R] >= 1 - eps."""
    if not (eps > 0.0):
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    if profile.M == 0.0:
        return 0.0
    return (profile.M / eps) ** (1.0 / profile.p)


def clip_radius(profile, k, eps):
    """Radius whose complement carries at most eps of the k-th moment.

    R = (M/eps)^(1/(p-k)); outside the ball of radius R the integral of
    ||tau||^k is at most eps for any distribution matching the profile.
    """
    if not (eps > 0.0):
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    if not (0 < k < profile.p):
        raise InvalidArgumentError(f"need 0 < k < p (k={k}, p={profile.p})")
    if profile.M == 0.0:
        return 0.0
    return (profile.M / eps) ** (1.0 / (profile.p - k))


def sampled_clip_radius(profile, k, p_prime, eps):
    """Clipping radius whose outer k-th-moment mass also concentrates empirically.

    With p~ = k(p'+1) <= p, returns
    ``R = max{ (M/eps)^(1/(p~ - i k)) : 1 <= i < p~/k }`` and the derived
    moment bound ``M' = 2^p' eps`` for the clipped map
    ``x -> ||tau(x)||^k 1[x outside ball]``; its empirical mean then deviates
    by at most :func:`outer_deviation_term` once ``m >= p'/(M'e)``.
    """
    if k < 1 or p_prime < 1:
        raise InvalidArgumentError("k and p_prime must be >= 1")
    if not (eps > 0.0):
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    p_tilde = k * (p_prime + 1)
    if profile.p < p_tilde:
        raise InvalidArgumentError(
            f"profile order {profile.p} below required p~ = k(p'+1) = {p_tilde}"
        )
    m_prime = (2.0 ** p_prime) * eps
    if profile.M == 0.0:
        return 0.0, m_prime
    radius = max(
        (profile.M / eps) ** (1.0 / (p_tilde - i * k)) for i in range(1, p_prime + 1)
    )
    return radius, m_prime


def outer_deviation_term(m_prime, p_prime, m, delta):
    """Empirical deviation of the clipped outer mass: sqrt(M'ep'/2m)(2/d)^(1/p')."""
    delta = _clip_delta(delta)
    if m_prime == 0.0:
        return 0.0
    floor = p_prime / (m_prime * math.e)
    if m < floor:
        raise PreconditionError(
            f"sample size {m} below floor p'/(M'e) = {floor:.6g}", floor=floor
        )
    return math.sqrt(m_prime * math.e * p_prime / (2.0 * m)) * (2.0 / delta) ** (1.0 / p_prime)


def chebyshev_deviation(M, p, m, delta):
    """Moment-only bound on |empirical mean - mean|: sqrt(Mpe/2m)(2/delta)^(1/p).

    Valid whenever the central moments of orders 2..p are bounded by M and
    ``m >= p/(Me)``; the deviation is exceeded with probability at most delta.
    """
    if p < 2 or p % 2 != 0:
        raise InvalidArgumentError(f"p must be even and >= 2, got {p}")
    delta = _clip_delta(delta)
    if M == 0.0:
        return 0.0
    if M < 0.0:
        raise InvalidArgumentError(f"M must be >= 0, got {M}")
    floor = p / (M * math.e)
    if m < floor:
        raise PreconditionError(
            f"sample size {m} below floor p/(Me) = {floor:.6g}", floor=floor
        )
    return math.sqrt(M * p * math.e / (2.0 * m)) * (2.0 / delta) ** (1.0 / p)


def fit_profile(sample, p, norm="l2"):
    """Empirical moment profile: center at the sample mean, M = max l-th moment.

    ``M = max_{l=1..p} mean(||x - mean||^l)``, so the profile invariants hold
    on the fitting sample by construction.
    """
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if sample.size == 0:
        raise InvalidArgumentError("fit_profile requires a nonempty sample")
    if p < 2 or p % 2 != 0:
        raise InvalidArgumentError(f"p must be even and >= 2, got {p}")
    center = sample.mean(axis=0)
    norms = np.atleast_1d(norm_value(sample - center, norm))
    M = max(float(np.mean(norms ** l)) for l in range(1, p + 1))
    return MomentProfile(p=p, M=M, center=center, norm=norm, center_kind="sample")


def empirical_moments(profile, sample):
    """The l-th empirical central moments (l = 1..p) of a sample under a profile."""
    norms = profile.centered_norms(sample)
    return np.array([float(np.mean(norms ** l)) for l in range(1, profile.p + 1)])


def reference_cost(sample):
    """k-means cost of a single center placed at the sample mean.

    Equals the trace of the empirical covariance; this is the recommended
    reference score c, so any heuristic's output beats it by construction.
    """
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if sample.size == 0:
        raise InvalidArgumentError("reference_cost requires a nonempty sample")
    center = sample.mean(axis=0)
    return float(np.mean(np.sum((sample - center) ** 2, axis=1)))


def _clip_delta(delta):
    if not (delta > 0.0):
        raise InvalidArgumentError(f"delta must be positive, got {delta}")
    if delta > 1.0:
        warnings.warn(
            f"delta = {delta} clipped to 1 (bounds stay valid, monotone in delta)",
            UserWarning,
            stacklevel=3,
        )
        return 1.0
    return float(delta)
