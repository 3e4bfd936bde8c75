"""Outer brackets and clamps, with the printed radii, plus data audits.

An outer bracket dominates every feasible cost from above and below outside
a compact ball whose complement carries negligible cost mass, so far-region
deviations can be discarded wholesale.  A clamp replaces the cost with
``min{phi(.; P \\cap C), R}`` at expectation error at most eps.

Radii are implemented verbatim as printed, including constants the source
derivations show to be loose (the factor 4 in the k-means upper bracket, the
factor-2 sandwich slack); looseness only makes the dominance audits easier
to pass, and reproducing the arithmetic exactly is what the golden tests pin
down.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import bregman as _bregman
from . import gmm as _gmm
from .errors import InvalidArgumentError, PreconditionError
from .moments import norm_value, outer_deviation_term


@dataclass(frozen=True)
class KmBracket:
    """k-means outer bracket: l = 0, u(x) = 4 r2 ||x - center||^2.

    R_B bounds the bracketing ball, R_C the center-truncation ball, and
    R_C0 the one-center ball that every feasible center set must meet.
    """

    eps: float
    p_prime: int
    M_prime: float
    R_B: float
    R_C: float
    R_C0: float
    u_coeff: float
    eps_rho: float
    eps_rho_hat: float
    tau: float
    center: np.ndarray
    spec: object
    profile: object

    def u(self, xs):
        norms = np.atleast_1d(norm_value(
            np.atleast_2d(np.asarray(xs, dtype=float)) - self.center,
            self.profile.norm))
        return self.u_coeff * norms ** 2

    def ell(self, xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        return np.zeros(xs.shape[0])


@dataclass(frozen=True)
class ClampSpec:
    """Clamping value R with truncation ball of radius C_radius.

    ``m_floor`` records the sample-size floor inherited from the bracket the
    clamp was built from (1.0 when unknown).
    """

    R: float
    C_radius: float
    center: np.ndarray
    m_floor: float = 1.0

    def __post_init__(self):
        if not (self.R > 0.0):
            raise InvalidArgumentError(f"clamping value must be positive, got {self.R}")


@dataclass(frozen=True)
class GmmBracket:
    """Gaussian-mixture outer bracket.

    u = ln p_max everywhere; l(x) = c_ell - (2/sigma1) ||x - center||^2
    dominates from below every partial mixture with means in the R6 ball,
    in-range spectra, and mass at least p0 / p_max.  ``eps_rho`` stores the
    item-1 scale (eps); downstream bound assembly uses 2*eps (the item-2
    scale), and reports flag the discrepancy.
    """

    eps: float
    p_prime: int
    M_prime: float
    c: float
    sigma1: float
    sigma2: float
    d: int
    p_max: float
    log_p_min: float
    p0: float
    c_ell: float
    R1: float
    R2: float
    R3: float
    R4: float
    R5: float
    R6: float
    R_B: float
    R_C: float
    M1: float
    eps_rho: float
    eps_rho_hat: float
    center: np.ndarray
    profile: object

    @property
    def p_min(self):
        return math.exp(self.log_p_min) if self.log_p_min > -700 else 0.0

    def u(self, xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        return np.full(xs.shape[0], math.log(self.p_max))

    def ell(self, xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        sq = np.sum((xs - self.center) ** 2, axis=1)
        return self.c_ell - (2.0 / self.sigma1) * sq


def one_center_radii(profile, spec, c):
    """Balls certifying that feasible center sets reach into the data bulk.

    R_B0 = (2M)^{1/p} has mass >= 1/2; any center set avoiding the ball of
    radius R_C0 = R_B0 + sqrt(4c/r1) pays cost >= 2c over the distribution.
    """
    if c < 0.0:
        raise InvalidArgumentError(f"reference cost must be >= 0, got {c}")
    r_b0 = (2.0 * profile.M) ** (1.0 / profile.p)
    r_c0 = r_b0 + math.sqrt(4.0 * c / spec.r1)
    return r_b0, r_c0


def build_km_bracket(profile, spec, c, eps, p_prime, m, delta):
    """Construct the k-means outer bracket at scale eps.

    Preconditions: 1 <= p' <= p/2 - 1 and m >= max{p'/(M'e), 9 ln(1/delta)}
    with M' = 2^{p'} eps.
    """
    if profile.M == 0.0:
        raise InvalidArgumentError("point-mass profile (M = 0) admits no bracket")
    if not (eps > 0.0):
        raise InvalidArgumentError("eps must be positive")
    p = profile.p
    if not (1 <= p_prime <= p / 2 - 1):
        raise PreconditionError(
            f"need 1 <= p' <= p/2 - 1 (p'={p_prime}, p={p})", floor=1)
    m_prime = (2.0 ** p_prime) * eps
    floor = max(p_prime / (m_prime * math.e), 9.0 * math.log(1.0 / delta))
    if m < floor:
        raise PreconditionError(
            f"sample size {m} below bracket floor {floor:.6g}", floor=floor)
    M = profile.M
    r_b0, r_c0 = one_center_radii(profile, spec, c)
    R_B = max(r_c0, max((M / eps) ** (1.0 / (p - 2 * i)) for i in range(1, p_prime + 1)))
    R_C = math.sqrt(spec.r2 / spec.r1) * (r_c0 + R_B) + R_B
    tau = min(math.sqrt(eps / (2.0 * spec.r2)),
              eps / (2.0 * (R_B + R_C) * spec.r2))
    eps_rho_hat = eps + outer_deviation_term(m_prime, p_prime, m, delta)
    return KmBracket(
        eps=eps, p_prime=p_prime, M_prime=m_prime,
        R_B=R_B, R_C=R_C, R_C0=r_c0, u_coeff=4.0 * spec.r2,
        eps_rho=eps, eps_rho_hat=eps_rho_hat, tau=tau,
        center=profile.center.copy(), spec=spec, profile=profile,
    )


def clamp_from_bracket(bracket, profile):
    """Clamp derived from a bracket: R = 2((2M)^{2/p} + R_B^2), C = the R_C ball."""
    R = 2.0 * ((2.0 * profile.M) ** (2.0 / profile.p) + bracket.R_B ** 2)
    floor = bracket.p_prime / (bracket.M_prime * math.e)
    return ClampSpec(R=R, C_radius=bracket.R_C, center=bracket.center.copy(),
                     m_floor=floor)


def gmm_separation_radius(sigma1, sigma2, d, eps):
    """Distance beyond which an in-range Gaussian's density drops below eps.

    R1 = sqrt(2 sigma2 ln(1/((2 pi sigma1)^{d/2} eps^2))); when the log
    argument is <= 1 the density bound already holds everywhere and the
    radius degenerates to 0 (warned).
    """
    if not (0.0 < sigma1 <= sigma2):
        raise InvalidArgumentError("need 0 < sigma1 <= sigma2")
    if not (eps > 0.0):
        raise InvalidArgumentError("eps must be positive")
    log_arg = -(d / 2.0) * math.log(2.0 * math.pi * sigma1) - 2.0 * math.log(eps)
    if log_arg <= 0.0:
        warnings.warn(
            "separation radius degenerate: density bound holds everywhere",
            UserWarning, stacklevel=2)
        return 0.0
    return math.sqrt(2.0 * sigma2 * log_arg)


def gmm_upper_bracket(profile, sigma1, eps):
    """Upper bracket u = ln p_max with outer ball radius (M |ln p_max| / eps)^{1/p}."""
    d = profile.d
    u_value = -(d / 2.0) * math.log(2.0 * math.pi * sigma1)
    if u_value == 0.0:
        return 0.0, 0.0
    r_u = (profile.M * abs(u_value) / eps) ** (1.0 / profile.p)
    return u_value, r_u


def gmm_one_center_radii(profile, sigma1, sigma2, c):
    """Radii R3..R6; feasible mixtures keep weight >= e^{4c}/(8e p_max) in the R6 ball."""
    if c > 0.5:
        raise PreconditionError(f"need c <= 1/2, got {c}", floor=None)
    d = profile.d
    p_max = (2.0 * math.pi * sigma1) ** (-d / 2.0)
    r3 = (2.0 * profile.M * abs(math.log(p_max))) ** (1.0 / profile.p)
    r4 = (2.0 * profile.M) ** (1.0 / profile.p)
    arg = math.log(8.0 * math.e / (2.0 * math.pi * sigma1) ** (d / 2.0)) - 4.0 * c
    if arg < 0.0:
        raise InvalidArgumentError(
            "parameter regime outside lemma scope (negative sqrt argument)")
    r5 = math.sqrt(2.0 * sigma2 * arg)
    r6 = max(r3, r4) + r5
    return r3, r4, r5, r6


def build_gmm_bracket(profile, sigma1, sigma2, c, eps, p_prime, m, delta):
    """Construct the Gaussian-mixture outer bracket at scale eps.

    Preconditions: eps in (0,1], sigma1 <= 1, c <= 1/2, p >= 4,
    1 <= p' <= p/2-1, and m >= max{p'/(M'e), 8 ln(1/d), 2|ln p_max|^2 ln(1/d)}.
    """
    if not (0.0 < eps <= 1.0):
        raise PreconditionError(f"need eps in (0, 1], got {eps}", floor=None)
    if sigma1 > 1.0:
        raise PreconditionError(f"need sigma1 <= 1, got {sigma1}", floor=None)
    if c > 0.5:
        raise PreconditionError(f"need c <= 1/2, got {c}", floor=None)
    p = profile.p
    d = profile.d
    if p < 4:
        raise PreconditionError(f"need p >= 4, got {p}", floor=4)
    if not (1 <= p_prime <= p / 2 - 1):
        raise PreconditionError(
            f"need 1 <= p' <= p/2 - 1 (p'={p_prime}, p={p})", floor=1)
    M = profile.M
    m_prime = (2.0 ** p_prime) * eps
    p_max = (2.0 * math.pi * sigma1) ** (-d / 2.0)
    log_p_max = math.log(p_max)
    floor = max(p_prime / (m_prime * math.e),
                8.0 * math.log(1.0 / delta),
                2.0 * log_p_max ** 2 * math.log(1.0 / delta))
    if m < floor:
        raise PreconditionError(
            f"sample size {m} below bracket floor {floor:.6g}", floor=floor)
    p0 = math.exp(4.0 * c) / (8.0 * math.e)
    c_ell = (4.0 * c - math.log(8.0 * math.e * p_max)
             - (d / 2.0) * math.log(2.0 * math.pi * sigma2))
    r3, r4, r5, r6 = gmm_one_center_radii(profile, sigma1, sigma2, c)
    M1 = ((2.0 * M * abs(c_ell)) ** (1.0 / p)
          + (4.0 * M * sigma1) ** (1.0 / (p - 2))
          + max(M ** (1.0 / (p - 2 * i)) for i in range(1, p_prime + 1))
          + (M * abs(log_p_max)) ** (1.0 / p))
    R_B = r6 + M1 / eps ** (1.0 / (p - 2 * p_prime))
    big_log = math.log(64.0 * math.e ** 2 * (2.0 * math.pi * sigma2) ** d
                       / ((2.0 * math.pi) ** d * p_max ** 4)) - 8.0 * c
    if big_log < 0.0:
        raise InvalidArgumentError(
            "parameter regime outside lemma scope (negative sqrt argument in R_C)")
    R_C = (1.0 + R_B * (1.0 + math.sqrt(8.0 * sigma2 / sigma1))
           + math.sqrt(4.0 * sigma2 * math.log(1.0 / eps))
           + math.sqrt(2.0 * sigma2 * big_log))
    log_p_min = (-(d / 2.0) * math.log(2.0 * math.pi * sigma2)
                 - (R_B + R_C) ** 2 / (2.0 * sigma1))
    eps_rho_hat = (eps
                   + (abs(c_ell) + abs(log_p_max))
                   * math.sqrt(math.log(1.0 / delta) / (2.0 * m))
                   + outer_deviation_term(m_prime, p_prime, m, delta))
    r1 = gmm_separation_radius(sigma1, sigma2, d, math.sqrt(p0))
    return GmmBracket(
        eps=eps, p_prime=p_prime, M_prime=m_prime, c=c,
        sigma1=sigma1, sigma2=sigma2, d=d,
        p_max=p_max, log_p_min=log_p_min, p0=p0, c_ell=c_ell,
        R1=r1, R2=r6 + r1, R3=r3, R4=r4, R5=r5, R6=r6,
        R_B=R_B, R_C=R_C, M1=M1,
        eps_rho=eps, eps_rho_hat=eps_rho_hat,
        center=profile.center.copy(), profile=profile,
    )


@dataclass
class AuditReport:
    """Outcome of a dominance audit: violation witnesses and worst margins."""

    kind: str
    n_models: int
    n_points: int
    n_checks: int
    violations: list
    min_margin_upper: float
    min_margin_lower: float
    skipped: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "kind": self.kind,
            "n_models": self.n_models,
            "n_points": self.n_points,
            "n_checks": self.n_checks,
            "violations": self.violations,
            "min_margin_upper": self.min_margin_upper,
            "min_margin_lower": self.min_margin_lower,
            "skipped": self.skipped,
            "ok": self.ok,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def audit_bracket(bracket, models, sample_outer):
    """Check l(x) <= phi(x; model) <= u(x) on supplied outer points.

    For the k-means bracket the upper dominance requires the model to meet
    the one-center ball C0; models that do not are reported as skipped
    rather than audited (the lemma does not speak about them).  For the GMM
    bracket, u applies to every in-range mixture while l applies only to
    lower-class members (means in the R6 ball, mass >= p0/p_max); models
    outside the lower class get the u check only.
    """
    xs = np.atleast_2d(np.asarray(sample_outer, dtype=float))
    violations = []
    skipped = []
    min_u = math.inf
    min_l = math.inf
    n_checks = 0
    if isinstance(bracket, KmBracket):
        kind = "kmeans"
        u_vals = bracket.u(xs)
        l_vals = bracket.ell(xs)
        for idx, model in enumerate(models):
            dists = np.atleast_1d(norm_value(
                model.centers - bracket.center, bracket.profile.norm))
            if not np.any(dists <= bracket.R_C0):
                skipped.append({"model": idx, "reason": "no center in C0 ball"})
                continue
            costs = _bregman.hard_cost_many(bracket.spec, model, xs)
            n_checks += 2 * xs.shape[0]
            margin_u = u_vals - costs
            margin_l = costs - l_vals
            min_u = min(min_u, float(np.min(margin_u)))
            min_l = min(min_l, float(np.min(margin_l)))
            for j in np.nonzero(margin_u < 0.0)[0]:
                violations.append({"model": idx, "side": "upper",
                                   "point": xs[j].tolist(),
                                   "phi": float(costs[j]),
                                   "bound": float(u_vals[j]),
                                   "margin": float(margin_u[j])})
            for j in np.nonzero(margin_l < 0.0)[0]:
                violations.append({"model": idx, "side": "lower",
                                   "point": xs[j].tolist(),
                                   "phi": float(costs[j]),
                                   "bound": float(l_vals[j]),
                                   "margin": float(margin_l[j])})
    elif isinstance(bracket, GmmBracket):
        kind = "gmm"
        u_vals = bracket.u(xs)
        l_vals = bracket.ell(xs)
        for idx, params in enumerate(models):
            costs = _gmm.mixture_cost_many(params, xs)
            n_checks += xs.shape[0]
            margin_u = u_vals - costs
            min_u = min(min_u, float(np.min(margin_u)))
            for j in np.nonzero(margin_u < 0.0)[0]:
                violations.append({"model": idx, "side": "upper",
                                   "point": xs[j].tolist(),
                                   "phi": float(costs[j]),
                                   "bound": float(u_vals[j]),
                                   "margin": float(margin_u[j])})
            in_lower_class = (
                params.mass >= bracket.p0 / bracket.p_max - 1e-12
                and all(np.linalg.norm(mu - bracket.center) <= bracket.R6 + 1e-12
                        for mu in params.means))
            if in_lower_class:
                n_checks += xs.shape[0]
                margin_l = costs - l_vals
                min_l = min(min_l, float(np.min(margin_l)))
                for j in np.nonzero(margin_l < 0.0)[0]:
                    violations.append({"model": idx, "side": "lower",
                                       "point": xs[j].tolist(),
                                       "phi": float(costs[j]),
                                       "bound": float(l_vals[j]),
                                       "margin": float(margin_l[j])})
            else:
                skipped.append({"model": idx, "reason": "outside lower class"})
    else:
        raise InvalidArgumentError(f"unknown bracket type {type(bracket).__name__}")
    return AuditReport(
        kind=kind, n_models=len(models), n_points=xs.shape[0],
        n_checks=n_checks, violations=violations,
        min_margin_upper=min_u, min_margin_lower=min_l, skipped=skipped,
    )
