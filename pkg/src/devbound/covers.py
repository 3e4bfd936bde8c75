"""Constructive epsilon-covers with explicit size formulas.

Four cover families:

* lp balls: axis grids of l-infinity boxes at scale tau/d, size
  ``(1 + 2Rd/tau)^d``;
* Bregman center covers: the same point grid at the resolution
  ``tau = min{sqrt(eps/2r2), eps/(2(R2+R)r2)}`` that makes the hard cost of
  any <=k centers match a grid tuple within eps uniformly on the data ball;
* bounded-spectrum covariances: an orthogonal net (grid matrices snapped to
  their polar factors) crossed with additive and multiplicative eigenvalue
  grids, giving simultaneous determinant-ratio and spectral-norm control;
* Gaussian-mixture components: weight grids (multiplicative + additive)
  crossed with a mean grid and a precision-matrix cover.

Size formulas are always reported (in log space, since realistic parameters
make them astronomical); elements are enumerated only when the formula value
fits under the cap, and the enumerated count is reported separately from the
formula bound.
"""

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError
from .linalg import jacobi_eigh, polar_orthogonal
from .moments import norm_value

DEFAULT_CAP = 10 ** 6


@dataclass
class CoverReport:
    """A constructed cover: resolution, formula size, optional elements.

    ``size_bound`` is the printed formula value (inf when it overflows);
    ``log_size_bound`` is its natural log and is always finite.  Elements are
    present only when ``size_bound <= cap`` and are canonically ordered.
    """

    tau: float
    size_bound: float
    log_size_bound: float
    element_kind: str
    enumerated: Optional[list] = None
    meta: dict = field(default_factory=dict)

    @property
    def enumerated_count(self):
        return None if self.enumerated is None else len(self.enumerated)


def _exp_or_inf(log_value):
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


def _axis_grid(lo, hi, radius):
    """Centers of intervals of half-width ``radius`` covering [lo, hi]."""
    length = hi - lo
    if length <= 0.0:
        return np.array([lo])
    n = max(1, math.ceil(length / (2.0 * radius)))
    return lo + (2.0 * np.arange(n) + 1.0) * radius


def lp_ball_cover(R, d, tau, cap=DEFAULT_CAP, center=None, norm="l2"):
    """Cover the radius-R lp ball with lp balls of radius tau.

    Grids each coordinate with l-infinity boxes at scale tau/d (those boxes
    sit inside lp balls of radius tau for every p >= 1); the size formula is
    ``(1 + 2Rd/tau)^d``.
    """
    if not (R > 0.0) or not (tau > 0.0):
        raise InvalidArgumentError("R and tau must be positive")
    if d < 1:
        raise InvalidArgumentError("d must be >= 1")
    log_size = d * math.log1p(2.0 * R * d / tau)
    size = _exp_or_inf(log_size)
    enumerated = None
    if size <= cap:
        axis = _axis_grid(-R, R, tau / d)
        pts = np.array(list(itertools.product(axis, repeat=d)))
        if center is not None:
            pts = pts + np.asarray(center, dtype=float)
        enumerated = list(pts)
    return CoverReport(
        tau=tau,
        size_bound=size,
        log_size_bound=log_size,
        element_kind="point",
        enumerated=enumerated,
        meta={"R": R, "d": d, "norm": norm},
    )


def nearest_point_distance(report, x, norm=None):
    """Distance from x to the nearest enumerated point, in the report's norm."""
    if report.enumerated is None:
        raise InvalidArgumentError("cover was not enumerated")
    tag = norm or report.meta.get("norm", "l2")
    pts = np.asarray(report.enumerated)
    dists = np.atleast_1d(norm_value(pts - np.asarray(x, dtype=float), tag))
    return float(np.min(dists))


def bregman_center_cover(spec, R, R2, eps, d, cap=DEFAULT_CAP, center=None):
    """Uniform cover of <=k center sets drawn from the radius-R2 parameter ball.

    The resolution ``tau = min{sqrt(eps/(2 r2)), eps/(2 (R2+R) r2)}`` makes
    the hard cost of any center collection match its per-center snap to the
    grid within eps, uniformly over the radius-R data ball.
    """
    if not (eps > 0.0):
        raise InvalidArgumentError("eps must be positive")
    tau = min(math.sqrt(eps / (2.0 * spec.r2)), eps / (2.0 * (R2 + R) * spec.r2))
    report = lp_ball_cover(R2, d, tau, cap=cap, center=center, norm=spec.norm)
    report.meta.update({"eps": eps, "R_data": R, "r2": spec.r2})
    return report


def clamped_cover_tau(spec, R3, eps):
    """Cover resolution for the clamped cost at clamping value R3.

    min{ sqrt(eps/(2 r2)), r1 eps / (2 r2 R3) }: clamping caps how far a
    point can sit from its active center, so the resolution only needs to
    shrink like 1/R3 rather than 1/R_C.
    """
    if not (R3 > 0.0):
        raise InvalidArgumentError("clamping value R3 must be positive")
    if not (eps > 0.0):
        raise InvalidArgumentError("eps must be positive")
    return min(math.sqrt(eps / (2.0 * spec.r2)), spec.r1 * eps / (2.0 * spec.r2 * R3))


def _orthogonal_net(d, tau):
    """Polar-snapped orthogonal net from the [-1,1]^{dxd} entry grid.

    Grid matrices at entrywise scale tau (covering radius tau/2 in max-norm)
    are snapped to their polar orthogonal factor; the factor is kept exactly
    when it lies within max-norm tau/2 of the grid matrix.  Enumeration is
    supported for d <= 2.
    """
    slack = 1e-12
    if d == 1:
        kept = set()
        for g in _axis_grid(-1.0, 1.0, tau / 2.0):
            if g == 0.0:
                continue
            o = math.copysign(1.0, g)
            if abs(o - g) <= tau / 2.0 + slack:
                kept.add(o)
        return [np.array([[o]]) for o in sorted(kept)]
    if d != 2:
        raise InvalidArgumentError("orthogonal net enumeration supports d <= 2")
    axis = _axis_grid(-1.0, 1.0, tau / 2.0)
    aa, bb = np.meshgrid(axis, axis, indexing="ij")
    cols = np.stack([aa.ravel(), bb.ravel()], axis=1)
    # necessary conditions for a column of a matrix within tau/2 of orthogonal
    col_band = math.sqrt(2.0) * tau / 2.0 + slack
    cols = cols[np.abs(np.linalg.norm(cols, axis=1) - 1.0) <= col_band]
    dots = np.abs(cols @ cols.T)
    dot_band = 2.0 * col_band + col_band ** 2 + slack
    ii, jj = np.nonzero(dots <= dot_band)
    kept = {}
    for i, j in zip(ii, jj):
        g = np.column_stack([cols[i], cols[j]])
        u = polar_orthogonal(g)
        if u is None:
            continue
        if np.max(np.abs(u - g)) <= tau / 2.0 + slack:
            kept[tuple(np.round(u, 12).ravel())] = u
    return [kept[key] for key in sorted(kept)]


def _eigenvalue_tuples(sigma1, sigma2, additive_step, ratio_step, d):
    """Nondecreasing d-tuples from the additive and multiplicative grids."""
    add = [sigma1 + j * additive_step
           for j in range(int(math.floor((sigma2 - sigma1) / additive_step)) + 1)] \
        if additive_step > 0.0 and sigma2 > sigma1 else [sigma1]
    if ratio_step > 1.0 and sigma2 > sigma1:
        n_mult = int(math.floor(math.log(sigma2 / sigma1) / math.log(ratio_step))) + 1
        mult = [sigma1 * ratio_step ** j for j in range(n_mult)]
    else:
        mult = [sigma1]
    tuples = set()
    for grid in (add, mult):
        tuples.update(itertools.combinations_with_replacement(sorted(grid), d))
    return sorted(tuples)


def covariance_cover(sigma1, sigma2, eps, d, cap=DEFAULT_CAP):
    """Cover of { A symmetric : sigma1 I <= A <= sigma2 I }.

    For any in-range A some element B satisfies both
    ``exp(-eps) <= |A|/|B| <= exp(eps)`` and ``||A - B||_2 <= eps``.
    Size formula:
    ``(1+32 s2/eps)^{d^2} ((1+(s2-s1)/(eps/2))^d + (ln(s2/s1)/(eps/d))^d)``.
    """
    if not (0.0 < sigma1 <= sigma2):
        raise InvalidArgumentError("need 0 < sigma1 <= sigma2")
    if not (eps > 0.0):
        raise InvalidArgumentError("eps must be positive")
    if d < 1:
        raise InvalidArgumentError("d must be >= 1")
    tau = eps / (8.0 * sigma2)
    log_ortho = d * d * math.log1p(32.0 * sigma2 / eps)
    log_add = d * math.log1p((sigma2 - sigma1) / (eps / 2.0))
    ratio = math.log(sigma2 / sigma1)
    log_mult = d * math.log(ratio / (eps / d)) if ratio > 0.0 else -math.inf
    log_eig = np.logaddexp(log_add, log_mult)
    log_size = log_ortho + float(log_eig)
    size = _exp_or_inf(log_size)
    enumerated = None
    logdets = None
    if size <= cap and d <= 2:
        ortho = _orthogonal_net(d, tau)
        tuples = _eigenvalue_tuples(sigma1, sigma2, eps / 2.0, math.exp(eps / d), d)
        seen = {}
        for o in ortho:
            for lam in tuples:
                b = o.T @ np.diag(lam) @ o
                b = 0.5 * (b + b.T)
                key = tuple(np.round(b, 12).ravel())
                if key not in seen:
                    seen[key] = (b, float(np.sum(np.log(lam))))
        ordered = [seen[key] for key in sorted(seen)]
        enumerated = [b for b, _ in ordered]
        logdets = np.array([ld for _, ld in ordered])
    return CoverReport(
        tau=tau,
        size_bound=size,
        log_size_bound=log_size,
        element_kind="covariance",
        enumerated=enumerated,
        meta={"sigma1": sigma1, "sigma2": sigma2, "eps": eps, "d": d,
              "logdets": logdets},
    )


def _sym_spectral_norms(diffs):
    """Spectral norms of a batch of symmetric 1x1 or 2x2 matrices."""
    diffs = np.asarray(diffs, dtype=float)
    d = diffs.shape[-1]
    if d == 1:
        return np.abs(diffs[..., 0, 0])
    if d == 2:
        half_tr = 0.5 * (diffs[..., 0, 0] + diffs[..., 1, 1])
        rad = np.sqrt((0.5 * (diffs[..., 0, 0] - diffs[..., 1, 1])) ** 2
                      + diffs[..., 0, 1] ** 2)
        return np.maximum(np.abs(half_tr + rad), np.abs(half_tr - rad))
    raise InvalidArgumentError("batch spectral norm supports d <= 2")


def covariance_best_match(report, a):
    """Best enumerated element for probe matrix a, with both guarantee margins.

    Exhaustive search minimizing the worse of the two normalized guarantees;
    returns (element, logdet_gap, spectral_distance).
    """
    if report.enumerated is None:
        raise InvalidArgumentError("cover was not enumerated")
    a = np.atleast_2d(np.asarray(a, dtype=float))
    w, _ = jacobi_eigh(a)
    logdet_a = float(np.sum(np.log(w)))
    elements = np.stack(report.enumerated)
    logdet_gaps = np.abs(report.meta["logdets"] - logdet_a)
    spec_dists = _sym_spectral_norms(elements - a[None, :, :])
    eps = report.meta["eps"]
    score = np.maximum(logdet_gaps / eps, spec_dists / eps)
    best = int(np.argmin(score))
    return report.enumerated[best], float(logdet_gaps[best]), float(spec_dists[best])


def mixture_cover(R, R2, sigma1, sigma2, c1, k, eps, d, cap=DEFAULT_CAP,
                  center=None):
    """Cover of partial Gaussian mixtures: mass in [c1, 1], means in the
    R2-ball, spectra in [sigma1, sigma2]; log-density matched within eps
    uniformly on the R-ball.

    Components are covered by a weight grid (multiplicative ratio e^{eps/4}
    unioned with an additive grid at step alpha0), a mean grid at scale tau1,
    and a precision-matrix cover at scale tau2; the mixture-level size is the
    component count raised to k.
    """
    if not (c1 > 0.0):
        raise InvalidArgumentError("mass lower bound c1 must be positive")
    if not (eps > 0.0):
        raise InvalidArgumentError("eps must be positive")
    if not (0.0 < sigma1 <= sigma2):
        raise InvalidArgumentError("need 0 < sigma1 <= sigma2")
    tau0 = math.exp(eps / 4.0)
    tau1 = min(eps * sigma1 / (16.0 * (R + R2)), math.sqrt(eps * sigma1 / 8.0))
    tau2 = eps / (4.0 * max(1.0, (R + R2) ** 2))
    # p_min underflows float range at realistic radii; carry its log instead
    log_p_min = (-(d / 2.0) * math.log(2.0 * math.pi * sigma2)
                 - (R + R2) ** 2 / (2.0 * sigma1))
    log_p_max = -(d / 2.0) * math.log(2.0 * math.pi * sigma1)
    p_min = math.exp(log_p_min) if log_p_min > -700 else 0.0
    p_max = math.exp(log_p_max)
    log_alpha0 = (math.log(eps) + math.log(c1) + log_p_min
                  - math.log(4.0 * k)
                  - float(np.logaddexp(log_p_max,
                                       math.log(eps / 2.0) + log_p_min)))
    if not (log_alpha0 < 0.0):
        raise InvalidArgumentError(
            f"degenerate weight floor alpha0 = exp({log_alpha0})")
    alpha0 = math.exp(log_alpha0) if log_alpha0 > -700 else 0.0
    tau4 = alpha0

    # W = ln(1/alpha0)/ln(tau0) + (1-alpha0)/tau4, assembled in log space
    log_weight_part = float(np.logaddexp(
        math.log(-log_alpha0) - math.log(math.log(tau0)),
        math.log1p(-alpha0) - log_alpha0))
    log_mean_part = d * math.log1p(2.0 * R2 * d / tau1)
    log_prec_ortho = d * d * math.log1p(32.0 / (sigma1 * tau2))
    log_prec_add = d * math.log1p((1.0 / sigma1 - 1.0 / sigma2) / (tau2 / 2.0))
    ratio = math.log(sigma2 / sigma1)
    log_prec_mult = d * math.log(ratio / (tau2 / d)) if ratio > 0.0 else -math.inf
    log_component = (log_weight_part + log_mean_part + log_prec_ortho
                     + float(np.logaddexp(log_prec_add, log_prec_mult)))
    log_size = k * log_component
    size = _exp_or_inf(log_size)

    enumerated = None
    meta = {
        "R": R, "R2": R2, "sigma1": sigma1, "sigma2": sigma2, "c1": c1,
        "k": k, "eps": eps, "d": d, "tau0": tau0, "tau1": tau1, "tau2": tau2,
        "tau4": tau4, "alpha0": alpha0, "log_alpha0": log_alpha0,
        "p_min": p_min, "p_max": p_max, "log_p_min": log_p_min,
        "log_component_bound": log_component,
    }
    if _exp_or_inf(log_component) <= cap and d <= 2 and alpha0 > 0.0:
        weight_grid = _weight_grid(alpha0, tau0, tau4)
        mean_report = lp_ball_cover(R2, d, tau1, cap=cap, center=center)
        prec_report = covariance_cover(1.0 / sigma2, 1.0 / sigma1, tau2, d, cap=cap)
        if mean_report.enumerated is not None and prec_report.enumerated is not None:
            covs = [np.linalg.inv(p) for p in prec_report.enumerated]
            meta.update({
                "weight_grid": weight_grid,
                "mean_report": mean_report,
                "precision_report": prec_report,
                "component_covariances": covs,
            })
            enumerated = [
                (w, mu, covs[ci])
                for w in weight_grid
                for mu in mean_report.enumerated
                for ci in range(len(covs))
            ]
    return CoverReport(
        tau=tau1,
        size_bound=size,
        log_size_bound=log_size,
        element_kind="mixture-component",
        enumerated=enumerated,
        meta=meta,
    )


def _weight_grid(alpha0, tau0, tau4):
    mult = []
    w = alpha0
    while w <= 1.0 + 1e-12:
        mult.append(min(w, 1.0))
        w *= tau0
    n_add = int(math.floor((1.0 - alpha0) / tau4)) + 1
    add = [alpha0 + j * tau4 for j in range(n_add)]
    return np.array(sorted(set(round(v, 15) for v in mult + add)))


def match_mixture(params, report):
    """Snap a mixture to its cover element, following the construction.

    Components with weight below alpha0 are dropped; otherwise the weight
    maps to the largest grid value below it, the mean to the nearest mean
    grid point, and the covariance to the best precision-cover element.
    Returns a partial mixture ready for log-density comparison.
    """
    from .gmm import GmmParams

    meta = report.meta
    if "weight_grid" not in meta:
        raise InvalidArgumentError("mixture cover was not enumerated")
    wgrid = meta["weight_grid"]
    mean_pts = np.asarray(meta["mean_report"].enumerated)
    prec_report = meta["precision_report"]
    covs = meta["component_covariances"]
    out_w, out_mu, out_cov = [], [], []
    for i in range(params.n_components):
        alpha = params.weights[i]
        if alpha < meta["alpha0"]:
            continue
        pos = int(np.searchsorted(wgrid, alpha + 1e-15, side="right")) - 1
        out_w.append(float(wgrid[max(pos, 0)]))
        dists = np.linalg.norm(mean_pts - params.means[i], axis=1)
        out_mu.append(mean_pts[int(np.argmin(dists))])
        prec = np.linalg.inv(params.covariances[i])
        elements = np.stack(prec_report.enumerated)
        score = np.maximum(
            np.abs(prec_report.meta["logdets"]
                   - float(np.sum(np.log(jacobi_eigh(prec)[0])))),
            _sym_spectral_norms(elements - prec[None, :, :]),
        )
        out_cov.append(covs[int(np.argmin(score))])
    if not out_w:
        return GmmParams(weights=np.zeros(0), means=np.zeros((0, params.d)),
                         covariances=np.zeros((0, params.d, params.d)),
                         sigma1=params.sigma1, sigma2=params.sigma2,
                         k=params.k, partial=True)
    covs_arr = np.stack(out_cov)
    eigs = np.concatenate([jacobi_eigh(c)[0] for c in covs_arr])
    lo = min(float(np.min(eigs)), params.sigma1)
    hi = max(float(np.max(eigs)), params.sigma2)
    return GmmParams(weights=np.array(out_w), means=np.stack(out_mu),
                     covariances=covs_arr, sigma1=lo * (1 - 1e-12),
                     sigma2=hi * (1 + 1e-12), k=params.k, partial=True)


def export_cover_csv(report, path):
    """Write the enumerated cover to CSV, one element per row, canonical order."""
    if report.enumerated is None:
        raise InvalidArgumentError("cover was not enumerated; nothing to export")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if report.element_kind == "point":
            d = len(np.atleast_1d(report.enumerated[0]))
            writer.writerow([f"x{i}" for i in range(d)])
            for pt in report.enumerated:
                writer.writerow([repr(float(v)) for v in np.atleast_1d(pt)])
        elif report.element_kind == "covariance":
            d = report.enumerated[0].shape[0]
            writer.writerow([f"a{i}{j}" for i in range(d) for j in range(d)])
            for mat in report.enumerated:
                writer.writerow([repr(float(v)) for v in mat.ravel()])
        else:
            d = len(np.atleast_1d(report.enumerated[0][1]))
            header = (["weight"] + [f"mu{i}" for i in range(d)]
                      + [f"s{i}{j}" for i in range(d) for j in range(d)])
            writer.writerow(header)
            for w, mu, cov in report.enumerated:
                row = [repr(float(w))]
                row += [repr(float(v)) for v in np.atleast_1d(mu)]
                row += [repr(float(v)) for v in np.asarray(cov).ravel()]
                writer.writerow(row)
