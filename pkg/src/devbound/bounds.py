"""Assembled finite-sample deviation bounds, reported term by term.

Each calculator evaluates a printed closed-form bound and returns a
:class:`BoundReport` whose terms sum to the total, together with the failure
probability, the rate exponent, and the sample-size floor below which the
statement is void.  Cover sizes enter only through their logarithms, so the
astronomically large mixture covers never overflow.

The k-means corollary hard-codes eps = m^{-1/2+1/p} (the choice made in its
derivation); pass ``eps`` explicitly to override.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .brackets import build_gmm_bracket, build_km_bracket
from .covers import mixture_cover
from .covers import clamped_cover_tau as _clamped_cover_tau
from .errors import InvalidArgumentError, PreconditionError
from .moments import _clip_delta


@dataclass
class BoundReport:
    """Per-term breakdown of a deviation bound; total == sum of terms."""

    kind: str
    total: float
    terms: dict
    failure_prob: float
    rate_exponent: float
    m_floor: float
    inputs_echo: dict

    def __post_init__(self):
        s = sum(self.terms.values())
        if not math.isclose(self.total, s, rel_tol=1e-12, abs_tol=1e-300):
            raise InvalidArgumentError(
                f"bound terms sum to {s}, not the stated total {self.total}")

    def to_dict(self):
        return {
            "kind": self.kind,
            "total": self.total,
            "terms": dict(self.terms),
            "failure_prob": self.failure_prob,
            "rate_exponent": self.rate_exponent,
            "m_floor": self.m_floor,
            "inputs_echo": dict(self.inputs_echo),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def rate_exponent_kmeans(p):
    """min{-1/4, -1/2 + 2/p}: the k-means deviation decay exponent in m.

    Accepts real p >= 4 (the delta-crossover check treats p as continuous).
    """
    if p < 4:
        raise InvalidArgumentError(f"need p >= 4, got {p}")
    return min(-0.25, -0.5 + 2.0 / p)


def rate_exponent_gmm(p):
    """-1/2 + 3/p: the Gaussian-mixture deviation decay exponent in m."""
    if p < 8:
        raise InvalidArgumentError(f"need p >= 8, got {p}")
    return -0.5 + 3.0 / p


def delta_crossover_p(delta):
    """The order p at which (2/delta)^{4/p} equals ln(2/delta)."""
    L = math.log(2.0 / delta)
    return 4.0 * L / math.log(L)


def kmeans_bound(M, p, c, d, k, m, delta, eps=None):
    """Explicit k-means bound (squared Euclidean cost, r1 = r2 = 2).

    With probability >= 1 - 3 delta, every center set beating cost c has
    empirical-vs-population cost gap at most

        m^{-1/2+min(1/4,2/p)} ( 4 + (72 c1^2 + 32 M1^2)
            sqrt(0.5 ln((m N1)^{dk}/delta))
            + sqrt(2^{p/4} e p / (8 sqrt(m))) (2/delta)^{4/p} )

    where c1 = (2M)^{1/p} + sqrt(2c), M1 = M^{1/(p-2)} + M^{2/p}, and
    N1 = 2 + 576 d (c1 + c1^2 + M1 + M1^2).
    """
    if p < 4 or p % 4 != 0:
        raise InvalidArgumentError(f"p must be a positive multiple of 4, got {p}")
    if M < 0.0 or c < 0.0:
        raise InvalidArgumentError("M and c must be nonnegative")
    if eps is not None:
        # explicit eps routes through the general theorem at r1 = r2 = 2 and
        # p' = p/4, whose tail term coincides with the printed one here
        from .bregman import squared_euclidean
        from .moments import MomentProfile
        profile = MomentProfile(p=p, M=M, center=np.zeros(d))
        rep = bregman_bound(profile, squared_euclidean(), c, eps, p // 4,
                            k, d, m, delta)
        rep.kind = "kmeans"
        rep.rate_exponent = rate_exponent_kmeans(p)
        rep.inputs_echo["eps_override"] = eps
        return rep
    delta = _clip_delta(delta)
    m_floor = max((p / (2.0 ** (p / 4.0 + 2.0) * math.e)) ** 2,
                  9.0 * math.log(1.0 / delta))
    if m < m_floor:
        raise PreconditionError(
            f"sample size {m} below corollary floor {m_floor:.6g}", floor=m_floor)
    c1 = (2.0 * M) ** (1.0 / p) + math.sqrt(2.0 * c)
    M1 = M ** (1.0 / (p - 2)) + M ** (2.0 / p)
    N1 = 2.0 + 576.0 * d * (c1 + c1 ** 2 + M1 + M1 ** 2)
    rate = rate_exponent_kmeans(p)
    pref = m ** rate
    log_term = d * k * (math.log(m) + math.log(N1)) - math.log(delta)
    term_bracket = pref * 4.0
    term_cover = pref * (72.0 * c1 ** 2 + 32.0 * M1 ** 2) * math.sqrt(0.5 * log_term)
    term_tail = pref * math.sqrt(2.0 ** (p / 4.0) * math.e * p / (8.0 * math.sqrt(m))) \
        * (2.0 / delta) ** (4.0 / p)
    terms = {
        "outer_bracket": term_bracket,
        "cover_fluctuation": term_cover,
        "moment_tail": term_tail,
    }
    return BoundReport(
        kind="kmeans",
        total=sum(terms.values()),
        terms=terms,
        failure_prob=min(3.0 * delta, 1.0),
        rate_exponent=rate,
        m_floor=m_floor,
        inputs_echo={"M": M, "p": p, "c": c, "d": d, "k": k, "m": m,
                     "delta": delta, "eps": eps,
                     "c1": c1, "M1": M1, "N1": N1},
    )


def bregman_bound(profile, spec, c, eps, p_prime, k, d, m, delta):
    """General Bregman deviation bound built on the outer bracket.

    total = 4 eps + 4 r2 R_C^2 sqrt((1/2m) ln(2|N|^k/delta))
          + sqrt(e 2^{p'} eps p' / 2m) (2/delta)^{1/p'}
    with |N| <= (1 + 2 R_C d / tau)^d; failure probability 3 delta.
    """
    delta = _clip_delta(delta)
    bracket = build_km_bracket(profile, spec, c, eps, p_prime, m, delta)
    m_floor = max(p_prime / (math.e * 2.0 ** p_prime * eps),
                  9.0 * math.log(1.0 / delta))
    log_cover = d * math.log1p(2.0 * bracket.R_C * d / bracket.tau)
    log_union = math.log(2.0) + k * log_cover - math.log(delta)
    term_bracket = 4.0 * eps
    term_cover = (4.0 * spec.r2 * bracket.R_C ** 2
                  * math.sqrt(log_union / (2.0 * m)))
    term_tail = (math.sqrt(math.e * 2.0 ** p_prime * eps * p_prime / (2.0 * m))
                 * (2.0 / delta) ** (1.0 / p_prime))
    terms = {
        "outer_bracket": term_bracket,
        "cover_fluctuation": term_cover,
        "moment_tail": term_tail,
    }
    return BoundReport(
        kind="bregman",
        total=sum(terms.values()),
        terms=terms,
        failure_prob=min(3.0 * delta, 1.0),
        rate_exponent=-0.5,
        m_floor=m_floor,
        inputs_echo={"M": profile.M, "p": profile.p, "c": c, "eps": eps,
                     "p_prime": p_prime, "k": k, "d": d, "m": m, "delta": delta,
                     "r1": spec.r1, "r2": spec.r2,
                     "R_B": bracket.R_B, "R_C": bracket.R_C, "tau": bracket.tau,
                     "log_cover_size": log_cover},
    )


def clamp_bound(clamp, spec, eps, eps_rho, eps_rho_hat, k, d, m, delta):
    """Deviation bound under a clamp (R, C) at scales eps_rho, eps_rho_hat.

    total = 2 eps + eps_rho + eps_rho_hat + R^2 sqrt((1/2m) ln(2|N|^k/delta))
    with the clamped-cover resolution tau and |N| <= (1 + 2 R_C d / tau)^d;
    failure probability delta.
    """
    delta = _clip_delta(delta)
    if m < clamp.m_floor:
        raise PreconditionError(
            f"sample size {m} below clamp floor {clamp.m_floor:.6g}",
            floor=clamp.m_floor)
    tau = _clamped_cover_tau(spec, clamp.R, eps)
    log_cover = d * math.log1p(2.0 * clamp.C_radius * d / tau)
    log_union = math.log(2.0) + k * log_cover - math.log(delta)
    terms = {
        "cover_scale": 2.0 * eps,
        "clamp_rho": eps_rho,
        "clamp_rho_hat": eps_rho_hat,
        "clamp_fluctuation": clamp.R ** 2 * math.sqrt(log_union / (2.0 * m)),
    }
    return BoundReport(
        kind="clamp",
        total=sum(terms.values()),
        terms=terms,
        failure_prob=delta,
        rate_exponent=-0.5,
        m_floor=clamp.m_floor,
        inputs_echo={"R": clamp.R, "C_radius": clamp.C_radius, "eps": eps,
                     "eps_rho": eps_rho, "eps_rho_hat": eps_rho_hat,
                     "k": k, "d": d, "m": m, "delta": delta, "tau": tau,
                     "log_cover_size": log_cover},
    )


def gmm_bound(profile, sigma1, sigma2, c, k, d, m, delta):
    """Bounded-spectrum Gaussian-mixture deviation bound.

    Sets eps = m^{-1/2+1/p} and p' = p/4, builds the mixture outer bracket,
    and assembles

        total = 4 eps + ln(2 p_max^2/(p_min p0)) sqrt((1/2m) ln(2|N|/delta))
              + eps_rho + eps_rho_hat

    with eps_rho = 2 eps (the conservative of the two printed scales; the
    report echoes both) and |N| the mixture-cover formula.  Failure
    probability 5 delta; rate exponent -1/2 + 3/p.
    """
    p = profile.p
    if p < 8 or p % 4 != 0:
        raise InvalidArgumentError(f"p must be a multiple of 4 with p >= 8, got {p}")
    if c > 0.5:
        raise PreconditionError(f"need c <= 1/2, got {c}", floor=None)
    if sigma1 > 1.0:
        raise PreconditionError(f"need sigma1 <= 1, got {sigma1}", floor=None)
    delta = _clip_delta(delta)
    theorem_floor = max((p / (2.0 ** (p / 4.0 + 2.0) * math.e)) ** 2,
                        8.0 * math.log(1.0 / delta),
                        d ** 2 * math.log(math.pi * sigma2) ** 2
                        * math.log(1.0 / delta))
    eps = m ** (-0.5 + 1.0 / p)
    p_prime = p // 4
    p_max = (2.0 * math.pi * sigma1) ** (-d / 2.0)
    lemma_floor = max(p_prime / (2.0 ** p_prime * eps * math.e),
                      8.0 * math.log(1.0 / delta),
                      2.0 * math.log(p_max) ** 2 * math.log(1.0 / delta))
    m_floor = max(theorem_floor, lemma_floor)
    if m < m_floor:
        raise PreconditionError(
            f"sample size {m} below theorem floor {m_floor:.6g}", floor=m_floor)
    bracket = build_gmm_bracket(profile, sigma1, sigma2, c, eps, p_prime, m, delta)
    cover = mixture_cover(R=bracket.R_B, R2=bracket.R_C,
                          sigma1=sigma1, sigma2=sigma2,
                          c1=bracket.p0 / bracket.p_max, k=k, eps=eps, d=d,
                          cap=0)
    log_union = math.log(2.0) + cover.log_size_bound - math.log(delta)
    log_prefactor = (math.log(2.0) + 2.0 * math.log(bracket.p_max)
                     - bracket.log_p_min - math.log(bracket.p0))
    eps_rho = 2.0 * eps
    terms = {
        "outer_bracket": 4.0 * eps,
        "cover_fluctuation": log_prefactor * math.sqrt(log_union / (2.0 * m)),
        "eps_rho": eps_rho,
        "eps_rho_hat": bracket.eps_rho_hat,
    }
    return BoundReport(
        kind="gmm",
        total=sum(terms.values()),
        terms=terms,
        failure_prob=min(5.0 * delta, 1.0),
        rate_exponent=rate_exponent_gmm(p),
        m_floor=m_floor,
        inputs_echo={"M": profile.M, "p": p, "sigma1": sigma1, "sigma2": sigma2,
                     "c": c, "k": k, "d": d, "m": m, "delta": delta,
                     "eps": eps, "p_prime": p_prime,
                     "eps_rho_item1": eps, "eps_rho_item2": eps_rho,
                     "R_B": bracket.R_B, "R_C": bracket.R_C,
                     "log_cover_size": cover.log_size_bound,
                     "log_prefactor": log_prefactor,
                     "c_ell": bracket.c_ell, "p_max": bracket.p_max,
                     "log_p_min": bracket.log_p_min, "p0": bracket.p0},
    )
