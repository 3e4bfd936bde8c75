"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Golden bound values were computed with the independent high-precision oracle
in oracle_bounds.py (mpmath, 50 digits) and frozen below; the oracle is also
re-run live so a drift in either side is caught.  Run with ``pytest -s`` to
see the per-criterion lines.
"""

import math
import pathlib
import time

import numpy as np
from click.testing import CliRunner

import devbound as db
from devbound.bregman import (CenterSet, divergence, hard_cost_many,
                              lloyd_restarts, quadratic_form,
                              squared_euclidean)
from devbound.brackets import audit_bracket, build_gmm_bracket, build_km_bracket
from devbound.cli import main as cli_main
from devbound.covers import (covariance_best_match, covariance_cover,
                             bregman_center_cover, lp_ball_cover,
                             match_mixture, mixture_cover,
                             nearest_point_distance)
from devbound.distributions import certified_moment, draw, student_t, two_point
from devbound.gmm import GmmParams, mixture_cost_many
from devbound.harness import ExperimentConfig, audit, bound_formula_slope, \
    rate_study, verify_gmm, verify_kmeans
from devbound.moments import MomentProfile, chebyshev_deviation

from oracle_bounds import (oracle_bregman_bound, oracle_clamp_bound,
                           oracle_gmm_bound, oracle_kmeans_bound)

REL_TOL = 1e-9

KMEANS_GOLDENS = [
    ((1.0, 4, 0.0, 1, 1, 1000000, 0.05), 26.051355938903576),
    ((1.0, 4, 0.0, 1, 1, 1000, 0.5), 116.91004087678598),
    ((0.5, 4, 1.0, 2, 3, 4096, 0.05), 449.7487051034714),
    ((18.514285714285716, 4, 2.5714285714285716, 2, 3, 4096, 0.05), 3912.9477916807746),
    ((1.0, 8, 0.0, 1, 1, 10000, 0.1), 68.07268695180589),
    ((2.0, 8, 1.5, 3, 5, 100000, 0.01), 570.6149415578436),
    ((1.0, 16, 0.0, 1, 1, 1000000, 0.05), 4.154195198887043),
    ((5.0, 16, 3.0, 2, 4, 100000000, 0.02), 12.004849277882748),
    ((1.0, 4, 0.5, 1, 2, 10000000000, 0.05), 8.664610452847715),
    ((0.25, 12, 0.1, 2, 2, 10000, 0.25), 64.87006807339074),
    ((3.0, 4, 2.0, 4, 6, 100000, 0.05), 1209.8117532038732),
    ((1.0, 8, 1.0, 2, 3, 1000000000, 0.001), 31.77585020893552),
]

BREGMAN_GOLDENS = [
    ((0.5, 4, 2.0, 2.0, 0.0, 0.5, 1, 1, 1, 2000, 0.5), 5.039761297302681),
    ((1.0, 4, 2.0, 2.0, 1.0, 0.25, 1, 2, 2, 4096, 0.05), 34.71667513819116),
    ((2.0, 8, 1.0, 4.0, 0.5, 0.1, 2, 3, 2, 100000, 0.1), 50.95181001743081),
    ((1.0, 8, 2.0, 2.0, 0.0, 0.05, 3, 1, 1, 1000000, 0.05), 2.3162004700197083),
    ((18.514, 4, 2.0, 2.0, 2.571, 0.125, 1, 3, 2, 4096, 0.05), 649.3931590381674),
    ((0.25, 12, 0.5, 3.0, 0.2, 0.3, 2, 2, 3, 10000, 0.25), 115.18256622922819),
    ((1.0, 4, 2.0, 2.0, 0.0, 1.0, 1, 1, 1, 100, 0.5), 22.7378767972155),
    ((3.0, 16, 2.0, 8.0, 1.0, 0.01, 4, 2, 2, 10000000, 0.01), 9.032098409960197),
    ((1.0, 6, 2.0, 2.0, 0.3, 0.4, 1, 2, 1, 5000, 0.2), 12.05604440794257),
    ((0.8, 8, 1.5, 2.5, 0.7, 0.2, 2, 4, 3, 20000, 0.02), 42.22036535774654),
]

CLAMP_GOLDENS = [
    ((4.0, 3.0, 2.0, 2.0, 0.5, 0.0, 0.0, 1, 1, 2000, 0.5), 1.6176603773400795),
    ((4.0, 3.0, 2.0, 2.0, 0.5, 0.5, 0.60427, 1, 1, 2000, 0.5), 2.7219303773400796),
    ((2.0, 5.0, 1.0, 3.0, 0.25, 0.1, 0.2, 2, 2, 10000, 0.05), 0.95788800357214),
    ((10.0, 8.0, 2.0, 2.0, 0.05, 0.05, 0.1, 3, 2, 100000, 0.01), 2.011277786121268),
    ((1.5, 2.0, 0.5, 1.5, 1.0, 0.0, 0.3, 1, 3, 1000, 0.1), 2.5078650290407483),
    ((6.0, 4.0, 2.0, 4.0, 0.8, 0.2, 0.4, 2, 1, 5000, 0.25), 3.5004441506510324),
    ((3.0, 3.0, 2.0, 2.0, 0.1, 0.1, 0.1, 4, 2, 1000000, 0.05), 0.4477653294594724),
    ((8.0, 10.0, 1.0, 2.0, 0.6, 0.0, 0.0, 2, 2, 10000, 0.5), 3.7619965352354092),
    ((5.0, 6.0, 2.0, 3.0, 0.33, 0.11, 0.22, 3, 3, 100000, 0.02), 1.4617413035195916),
    ((2.5, 2.5, 1.5, 2.5, 0.4, 0.05, 0.07, 1, 2, 8000, 0.15), 1.1000480277251323),
]

GMM_GOLDENS = [
    ((23994.514285714286, 8, 0.25, 4.0, 0.5, 2, 2, 4096, 0.05), 26082290.68335841),
    ((6561.0, 8, 0.25, 4.0, 0.5, 2, 1, 4096, 0.05), 12592171.29951878),
    ((1.0, 8, 0.5, 2.0, 0.25, 2, 1, 10000, 0.1), 15938.518449856827),
    ((2.0, 12, 0.1, 1.0, 0.0, 3, 2, 100000, 0.05), 166131.36720118189),
    ((1.0, 8, 1.0, 16.0, 0.1, 1, 1, 10000, 0.01), 63179.560743714705),
    ((10.0, 16, 0.5, 0.5, 0.0, 2, 2, 1000000, 0.05), 375.47202365121166),
    ((5.0, 12, 0.8, 3.0, 0.1, 1, 3, 10000, 0.1), 4935.361127764573),
    ((0.3, 8, 0.6, 1.2, 0.4, 4, 2, 100000, 0.2), 2094.4548730052284),
    ((1.0, 8, 0.9, 1.1, 0.3, 2, 2, 100000, 0.5), 880.4242842188312),
    ((100.0, 8, 0.3, 2.0, 0.2, 3, 2, 1000000, 0.05), 137786.8073293829),
]


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _report(name, t0, detail=""):
    print(f"[acceptance] {name} PASS ({time.time() - t0:.1f}s) {detail}")


def test_criterion_1_formula_goldens():
    t0 = time.time()
    for args, want in KMEANS_GOLDENS:
        got = db.kmeans_bound(*args).total
        assert _rel(got, want) <= REL_TOL, (args, got, want)
        assert _rel(float(oracle_kmeans_bound(*args)), want) <= REL_TOL
    spec_cache = {}
    for args, want in BREGMAN_GOLDENS:
        M, p, r1, r2, c, eps, pp, k, d, m, delta = args
        prof = MomentProfile(p=p, M=M, center=np.zeros(d))
        spec = spec_cache.setdefault((r1, r2), db.BregmanSpec(
            name="g", f=lambda x: float(np.dot(x, x)),
            grad=lambda x: 2.0 * np.asarray(x), r1=r1, r2=r2))
        got = db.bregman_bound(prof, spec, c, eps, pp, k, d, m, delta).total
        assert _rel(got, want) <= REL_TOL, (args, got, want)
        assert _rel(float(oracle_bregman_bound(*args)), want) <= REL_TOL
    for args, want in CLAMP_GOLDENS:
        R, cr, r1, r2, eps, er, erh, k, d, m, delta = args
        clamp = db.ClampSpec(R=R, C_radius=cr, center=np.zeros(d))
        spec = spec_cache.setdefault((r1, r2), db.BregmanSpec(
            name="g", f=lambda x: float(np.dot(x, x)),
            grad=lambda x: 2.0 * np.asarray(x), r1=r1, r2=r2))
        got = db.clamp_bound(clamp, spec, eps, er, erh, k, d, m, delta).total
        assert _rel(got, want) <= REL_TOL, (args, got, want)
        assert _rel(float(oracle_clamp_bound(*args)), want) <= REL_TOL
    for args, want in GMM_GOLDENS:
        M, p, s1, s2, c, k, d, m, delta = args
        prof = MomentProfile(p=p, M=M, center=np.zeros(d))
        got = db.gmm_bound(prof, s1, s2, c, k, d, m, delta).total
        assert _rel(got, want) <= REL_TOL, (args, got, want)
        assert _rel(float(oracle_gmm_bound(*args)), want) <= REL_TOL
    n = len(KMEANS_GOLDENS) + len(BREGMAN_GOLDENS) + len(CLAMP_GOLDENS) \
        + len(GMM_GOLDENS)
    _report("criterion 1 (formula goldens)", t0, f"{n} tuples at 1e-9 relative")


def test_criterion_2_sandwich_and_near_triangle():
    t0 = time.time()
    rng = np.random.default_rng(101)
    specs = [squared_euclidean(),
             quadratic_form(np.array([[2.0, 0.5], [0.5, 1.0]]))]
    for spec in specs:
        xs = rng.normal(size=(10_000, 2)) * 3.0
        ys = rng.normal(size=(10_000, 2)) * 3.0
        zs = rng.normal(size=(10_000, 2)) * 3.0
        b_xy = np.array([divergence(spec, x, y) for x, y in zip(xs, ys)])
        sq = np.sum((xs - ys) ** 2, axis=1)
        assert np.all(spec.r1 / 2.0 * sq <= b_xy + 1e-9)
        assert np.all(b_xy <= spec.r2 * sq + 1e-9)
        b_yz = np.array([divergence(spec, y, z) for y, z in zip(ys, zs)])
        b_xz = np.array([divergence(spec, x, z) for x, z in zip(xs, zs)])
        slack = spec.r2 * np.linalg.norm(xs - ys, axis=1) \
            * np.linalg.norm(ys - zs, axis=1)
        assert np.all(b_xz <= b_xy + b_yz + slack + 1e-9)
    sqeuc = specs[0]
    xs = rng.normal(size=(10_000, 2))
    ys = rng.normal(size=(10_000, 2))
    direct = np.sum((xs - ys) ** 2, axis=1)
    vals = np.array([divergence(sqeuc, x, y) for x, y in zip(xs, ys)])
    rel = np.abs(vals - direct) / np.maximum(direct, 1e-300)
    assert np.max(rel) <= 1e-12
    _report("criterion 2 (sandwich & near-triangle)", t0,
            "2 specs x 10^4 pairs/triples, zero violations")


def test_criterion_3_chebyshev_frequency():
    t0 = time.time()
    reps, m, delta = 10_000, 1000, 0.1
    threshold = chebyshev_deviation(1.0, 2, m, delta)
    rng = np.random.default_rng(103)
    draws = rng.integers(0, 2, size=(reps, m)).astype(np.float64) * 2.0 - 1.0
    means = draws.mean(axis=1)
    freq = float(np.mean(np.abs(means) > threshold))
    limit = delta + 3.0 * math.sqrt(delta / reps)
    assert freq <= limit
    _report("criterion 3 (concentration frequency)", t0,
            f"failure freq {freq:.4f} <= {limit:.4f}")


def test_criterion_4_cover_soundness():
    t0 = time.time()
    rng = np.random.default_rng(104)
    # lp balls, d in {1, 2}
    for d, tau in ((1, 0.25), (2, 0.35)):
        rep = lp_ball_cover(2.0, d, tau)
        assert rep.enumerated_count <= rep.size_bound
        for _ in range(1000):
            x = rng.normal(size=d)
            norm = np.linalg.norm(x)
            x = x / max(norm, 1e-12) * 2.0 * rng.random()
            assert nearest_point_distance(rep, x) <= tau + 1e-12

    # uniform Bregman center cover at the lemma's resolution
    spec = squared_euclidean()
    eps, R, R2, d, k = 0.5, 1.0, 3.0, 2, 2
    rep = bregman_center_cover(spec, R, R2, eps, d=d, cap=10 ** 7)
    pts = np.asarray(rep.enumerated)
    assert rep.enumerated_count <= rep.size_bound
    for _ in range(1000):
        centers = rng.uniform(-R2 / math.sqrt(d), R2 / math.sqrt(d), size=(k, d))
        snapped = np.stack([
            pts[np.argmin(np.max(np.abs(pts - p), axis=1))] for p in centers])
        P = CenterSet(centers=centers, k=k)
        Q = CenterSet(centers=snapped, k=k)
        x = rng.normal(size=(1, d))
        nrm = np.linalg.norm(x)
        x = x / max(nrm, 1e-12) * R * rng.random()
        gap = abs(float(hard_cost_many(spec, P, x)[0])
                  - float(hard_cost_many(spec, Q, x)[0]))
        assert gap <= eps + 1e-12

    # covariance covers: d = 1 and d = 2 (the d = 2 formula bound is loose by
    # orders of magnitude, so the cap is set by the actual element count)
    for dd, s1, s2, ce in ((1, 0.5, 2.0, 0.5), (2, 0.5, 2.0, 0.5)):
        rep = covariance_cover(s1, s2, ce, dd, cap=10 ** 11)
        assert rep.enumerated is not None
        assert rep.enumerated_count <= 10 ** 6
        assert rep.enumerated_count <= rep.size_bound
        for _ in range(1000):
            lam = rng.uniform(s1, s2, size=dd)
            theta = rng.uniform(0.0, 2.0 * math.pi)
            if dd == 1:
                a = np.array([[lam[0]]])
            else:
                c, s = math.cos(theta), math.sin(theta)
                o = np.array([[c, -s], [s, c]])
                a = o @ np.diag(lam) @ o.T
            _, gap, dist = covariance_best_match(rep, a)
            assert gap <= ce + 1e-12, (dd, gap)
            assert dist <= ce + 1e-12, (dd, dist)

    # mixture components: k = 1, d = 1 at an enumerable scale
    s = 1.0 / (2.0 * math.pi)
    mix = mixture_cover(R=0.05, R2=0.05, sigma1=s, sigma2=1.5 * s, c1=1.0,
                        k=1, eps=1.0, d=1)
    assert mix.enumerated is not None
    assert mix.size_bound <= 10 ** 6
    assert mix.enumerated_count <= mix.size_bound
    for _ in range(1000):
        mu = np.array([rng.uniform(-0.05, 0.05)])
        sig = np.array([[rng.uniform(s, 1.5 * s)]])
        params = GmmParams(weights=[1.0], means=[mu], covariances=[sig],
                           sigma1=s, sigma2=1.5 * s, k=1)
        matched = match_mixture(params, mix)
        x = np.array([[rng.uniform(-0.05, 0.05)]])
        gap = abs(float(mixture_cost_many(params, x)[0])
                  - float(mixture_cost_many(matched, x)[0]))
        assert gap <= 1.0 + 1e-9
    _report("criterion 4 (cover soundness)", t0,
            "4 cover kinds x 10^3 probes, zero violations")


def test_criterion_5_bracket_audit():
    t0 = time.time()
    dist = student_t(9, 2)
    prof = certified_moment(dist, 4)
    spec = squared_euclidean()
    m = 4096
    eps = m ** -0.25
    rng = np.random.default_rng(105)

    sample = draw(dist, m, 1051)
    c = db.reference_cost(sample)
    bracket = build_km_bracket(prof, spec, c, eps, 1, m, 0.1)

    # 50 feasible center sets: fits, the mean center, feasible perturbations
    models = [cs for cs, _, _ in lloyd_restarts(spec, sample, 3, restarts=16,
                                                seed=9)]
    models.append(CenterSet(centers=sample.mean(axis=0)[None, :], k=3))
    base = models[0]
    while len(models) < 50:
        cand = CenterSet(centers=base.centers
                         + rng.normal(scale=0.25 * math.sqrt(c),
                                      size=base.centers.shape), k=3)
        if db.is_feasible(spec, cand, sample, c):
            models.append(cand)
    dirs = rng.normal(size=(10_000, 2))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    outer = dirs * (bracket.R_B * (1.0 + 4.0 * rng.random((10_000, 1))) + 1e-9)
    km_report = audit_bracket(bracket, models, outer)
    assert km_report.ok and not km_report.skipped
    assert km_report.n_checks == 2 * 10_000 * 50

    # GMM side: u everywhere, l on lower-class members
    s1, s2 = 0.25, 2.0
    prof8 = certified_moment(dist, 8)
    gbr = build_gmm_bracket(prof8, s1, s2, 0.0, eps, 2, m, 0.1)
    members = []
    while len(members) < 50:
        n_comp = int(rng.integers(1, 3))
        mus = rng.normal(size=(n_comp, 2))
        mus = mus / np.linalg.norm(mus, axis=1, keepdims=True) \
            * rng.random((n_comp, 1)) * gbr.R6
        covs = [np.eye(2) * rng.uniform(s1, s2) for _ in range(n_comp)]
        w = rng.random(n_comp)
        w = w / w.sum() * rng.uniform(gbr.p0 / gbr.p_max, 1.0)
        members.append(GmmParams(weights=w, means=mus, covariances=covs,
                                 sigma1=s1, sigma2=s2, partial=True))
    gouter = dirs * (gbr.R_B * (1.0 + 4.0 * rng.random((10_000, 1))) + 1e-9)
    gmm_report = audit_bracket(gbr, members, gouter)
    assert gmm_report.ok and not gmm_report.skipped

    # outer-mass / truncation / clamp checks across 100 resampled trials
    cfg = ExperimentConfig(distribution=dist, cost="kmeans", k=3, p=4, m=m,
                           trials=1, n_eval=10_000, seed=1052,
                           probes={"restarts": 4, "perturbations": 8,
                                   "far_centers": 2})
    rep = audit(cfg, n_outer=1000, n_mass=50_000, n_resample=100)
    assert rep["dominance"]["violations"] == []
    assert rep["outer_mass"]["pass_fraction"] >= 0.95
    assert rep["truncation"]["pass_fraction"] >= 0.95
    assert rep["clamp_property"]["pass_fraction"] >= 0.95
    _report("criterion 5 (bracket audit)", t0,
            f"0 violations over 10^4 x 50 x 2; MC pass fractions "
            f"{rep['outer_mass']['pass_fraction']:.2f}/"
            f"{rep['truncation']['pass_fraction']:.2f}/"
            f"{rep['clamp_property']['pass_fraction']:.2f}")


def test_criterion_6_bound_dominance():
    t0 = time.time()
    km_cfg = ExperimentConfig(
        distribution=student_t(9, 2), cost="kmeans", k=3, p=4, m=4096,
        trials=200, delta=0.05, n_eval=20_000, seed=106,
        probes={"restarts": 16, "perturbations": 32, "far_centers": 8})
    km = verify_kmeans(km_cfg)
    assert km.dominance_fraction >= 0.85
    gmm_cfg = ExperimentConfig(
        distribution=student_t(9, 2), cost="gmm", k=2, p=8, m=4096,
        trials=100, delta=0.05, c_policy=0.5, sigma1=0.25, sigma2=4.0,
        n_eval=20_000, seed=107,
        probes={"restarts": 16, "perturbations": 32, "far_centers": 8})
    gm = verify_gmm(gmm_cfg)
    assert gm.dominance_fraction >= 0.75
    _report("criterion 6 (bound dominance)", t0,
            f"kmeans {km.dominance_fraction:.3f} >= 0.85, "
            f"gmm {gm.dominance_fraction:.3f} >= 0.75")


def test_criterion_7_rates():
    t0 = time.time()
    grid = [10 ** 8, 10 ** 9, 10 ** 10]
    for p in (4, 8, 16):
        slope = bound_formula_slope(p, grid, M=1.0, c=0.0, d=1, k=1, delta=0.05)
        want = db.rate_exponent_kmeans(p)
        assert abs(slope - want) <= 0.03, (p, slope, want)
    cfg = ExperimentConfig(
        distribution=two_point(), cost="kmeans", k=1, p=4,
        m_grid=[2 ** j for j in range(8, 15)], trials=50, n_eval=10 ** 6,
        seed=108, probes={"restarts": 2, "perturbations": 8, "far_centers": 0})
    rep = rate_study(cfg)
    assert rep.rate_fit["observed_slope"] <= -0.2
    _report("criterion 7 (rates)", t0,
            f"bound slopes within 0.03; observed slope "
            f"{rep.rate_fit['observed_slope']:.3f} <= -0.2")


def test_criterion_8_delta_crossover():
    t0 = time.time()
    for delta in (0.1, 0.01):
        L = math.log(2.0 / delta)
        p = 4.0 * L / math.log(L)
        lhs = (2.0 / delta) ** (4.0 / p)
        assert abs(lhs - L) <= 1e-9 * L
        assert abs(p - db.delta_crossover_p(delta)) <= 1e-12 * p
    _report("criterion 8 (delta crossover)", t0, "identity to 1e-9")


def test_criterion_9_reproducibility(tmp_path):
    t0 = time.time()
    cfg_path = (pathlib.Path(__file__).resolve().parent.parent
                / "configs" / "verify_kmeans_smoke.json")
    runner = CliRunner()
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        res = runner.invoke(cli_main, ["--config", str(cfg_path), "--out",
                                       str(out), "--quiet", "verify", "kmeans"])
        assert res.exit_code == 0, res.output
        outs.append(out)
    assert (outs[0] / "report.json").read_bytes() == \
        (outs[1] / "report.json").read_bytes()
    assert (outs[0] / "trials.csv").read_bytes() == \
        (outs[1] / "trials.csv").read_bytes()
    _report("criterion 9 (reproducibility)", t0,
            "byte-identical report.json and trials.csv")
