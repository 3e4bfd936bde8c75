"""Command-line surface: bounds, brackets, covers, fitters, verification.

Exit codes: 0 success, 1 invalid config/arguments, 2 theorem precondition
(sample-size floor) violation, 3 dominance-fraction acceptance failure.
"""

import json
import os
import sys

import click
import numpy as np

from . import __version__
from . import bregman as _bregman
from . import gmm as _gmm
from .bounds import bregman_bound, clamp_bound, gmm_bound, kmeans_bound
from .brackets import ClampSpec, build_gmm_bracket, build_km_bracket, clamp_from_bracket
from .covers import covariance_cover, export_cover_csv, lp_ball_cover, mixture_cover
from .distributions import draw
from .errors import InvalidArgumentError, PreconditionError, UnsupportedOrderError
from .harness import (ExperimentConfig, audit as run_audit, dominance_floor,
                      rate_study, verify_gmm, verify_kmeans)
from .moments import MomentProfile
from .reporting import write_audit, write_json, write_verification


def _fail(message, code):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(ctx):
    path = ctx.obj.get("config")
    if not path:
        _fail("this command requires --config <json>", 1)
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(f"cannot read config {path}: {exc}", 1)
    try:
        cfg = ExperimentConfig.from_dict(raw)
    except (InvalidArgumentError, KeyError, TypeError, ValueError) as exc:
        _fail(f"invalid config: {exc}", 1)
    if ctx.obj.get("seed") is not None:
        cfg.seed = ctx.obj["seed"]
    if ctx.obj.get("threads") is not None:
        cfg.threads = ctx.obj["threads"]
    return cfg


def _emit_bound(ctx, report):
    if ctx.obj.get("quiet"):
        pass
    elif ctx.obj.get("format") == "json":
        click.echo(report.to_json(indent=2))
    elif ctx.obj.get("format") == "csv":
        click.echo("term,value")
        for name, value in report.terms.items():
            click.echo(f"{name},{value!r}")
        click.echo(f"total,{report.total!r}")
    else:
        click.echo(f"{report.kind} bound  (failure probability {report.failure_prob:g}, "
                   f"m floor {report.m_floor:.6g})")
        for name, value in report.terms.items():
            click.echo(f"  {name:<20} {value:.9g}")
        click.echo(f"  {'total':<20} {report.total:.9g}")
        click.echo(f"  rate exponent        {report.rate_exponent:+.6g}")
    out = ctx.obj.get("out")
    if out:
        os.makedirs(out, exist_ok=True)
        write_json(report.to_dict(), os.path.join(out, "bound.json"))


def _emit_cover(ctx, report, name):
    payload = {
        "tau": report.tau,
        "size_bound": report.size_bound,
        "log_size_bound": report.log_size_bound,
        "element_kind": report.element_kind,
        "enumerated_count": report.enumerated_count,
    }
    if ctx.obj.get("quiet"):
        pass
    elif ctx.obj.get("format") == "json":
        click.echo(json.dumps(payload, indent=2))
    elif ctx.obj.get("format") == "csv":
        click.echo("field,value")
        for key, value in payload.items():
            click.echo(f"{key},{value}")
    else:
        for key, value in payload.items():
            click.echo(f"  {key:<18} {value}")
    out = ctx.obj.get("out")
    if out:
        os.makedirs(out, exist_ok=True)
        write_json(payload, os.path.join(out, f"{name}_cover.json"))
        if report.enumerated is not None:
            export_cover_csv(report, os.path.join(out, f"{name}_elements.csv"))


@click.group()
@click.option("--config", type=click.Path(), default=None, help="JSON config path.")
@click.option("--seed", type=int, default=None, help="Master seed override.")
@click.option("--out", type=click.Path(), default=None, help="Output directory.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None,
              help="stdout format for scalar reports.")
@click.option("--threads", type=int, default=None, help="Worker threads (0 = auto).")
@click.option("--quiet", is_flag=True, default=False)
@click.version_option(version=__version__)
@click.pass_context
def main(ctx, config, seed, out, fmt, threads, quiet):
    """Uniform deviation bounds for k-means and friends, with verification."""
    ctx.obj = {"config": config, "seed": seed, "out": out, "format": fmt,
               "threads": threads, "quiet": quiet}


@main.group()
def bound():
    """Print an assembled deviation bound, term by term."""


@bound.command("kmeans")
@click.option("--moment-bound", "M", type=float, required=True)
@click.option("--p", type=int, required=True)
@click.option("--c", type=float, required=True)
@click.option("--d", type=int, required=True)
@click.option("--k", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--delta", type=float, required=True)
@click.pass_context
def bound_kmeans(ctx, M, p, c, d, k, m, delta):
    try:
        report = kmeans_bound(M, p, c, d, k, m, delta)
    except PreconditionError as exc:
        _fail(str(exc), 2)
    except InvalidArgumentError as exc:
        _fail(str(exc), 1)
    _emit_bound(ctx, report)


@bound.command("bregman")
@click.option("--moment-bound", "M", type=float, required=True)
@click.option("--p", type=int, required=True)
@click.option("--r1", type=float, default=2.0)
@click.option("--r2", type=float, default=2.0)
@click.option("--c", type=float, required=True)
@click.option("--eps", type=float, required=True)
@click.option("--p-prime", type=int, required=True)
@click.option("--k", type=int, required=True)
@click.option("--d", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--delta", type=float, required=True)
@click.pass_context
def bound_bregman(ctx, M, p, r1, r2, c, eps, p_prime, k, d, m, delta):
    try:
        profile = MomentProfile(p=p, M=M, center=np.zeros(d))
        spec = _quadratic_spec(r1, r2)
        report = bregman_bound(profile, spec, c, eps, p_prime, k, d, m, delta)
    except PreconditionError as exc:
        _fail(str(exc), 2)
    except InvalidArgumentError as exc:
        _fail(str(exc), 1)
    _emit_bound(ctx, report)


@bound.command("clamp")
@click.option("--clamp-value", "R", type=float, required=True)
@click.option("--c-radius", type=float, required=True)
@click.option("--r1", type=float, default=2.0)
@click.option("--r2", type=float, default=2.0)
@click.option("--eps", type=float, required=True)
@click.option("--eps-rho", type=float, required=True)
@click.option("--eps-rho-hat", type=float, required=True)
@click.option("--k", type=int, required=True)
@click.option("--d", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--delta", type=float, required=True)
@click.pass_context
def bound_clamp(ctx, R, c_radius, r1, r2, eps, eps_rho, eps_rho_hat, k, d, m, delta):
    try:
        clamp = ClampSpec(R=R, C_radius=c_radius, center=np.zeros(d))
        spec = _quadratic_spec(r1, r2)
        report = clamp_bound(clamp, spec, eps, eps_rho, eps_rho_hat, k, d, m, delta)
    except PreconditionError as exc:
        _fail(str(exc), 2)
    except InvalidArgumentError as exc:
        _fail(str(exc), 1)
    _emit_bound(ctx, report)


@bound.command("gmm")
@click.option("--moment-bound", "M", type=float, required=True)
@click.option("--p", type=int, required=True)
@click.option("--d", type=int, required=True)
@click.option("--sigma1", type=float, required=True)
@click.option("--sigma2", type=float, required=True)
@click.option("--c", type=float, required=True)
@click.option("--k", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--delta", type=float, required=True)
@click.pass_context
def bound_gmm(ctx, M, p, d, sigma1, sigma2, c, k, m, delta):
    try:
        profile = MomentProfile(p=p, M=M, center=np.zeros(d))
        report = gmm_bound(profile, sigma1, sigma2, c, k, d, m, delta)
    except PreconditionError as exc:
        _fail(str(exc), 2)
    except InvalidArgumentError as exc:
        _fail(str(exc), 1)
    _emit_bound(ctx, report)


def _quadratic_spec(r1, r2):
    if r1 == r2 == 2.0:
        return _bregman.squared_euclidean()
    return _bregman.BregmanSpec(
        name="cli", f=lambda x: float(np.dot(x, x)),
        grad=lambda x: 2.0 * np.asarray(x), r1=r1, r2=r2,
        batch_fn=lambda xs, y: np.sum((xs - y) ** 2, axis=1))


@main.group()
def bracket():
    """Construct an outer bracket and print its radii."""


@bracket.command("km")
@click.option("--moment-bound", "M", type=float, required=True)
@click.option("--p", type=int, required=True)
@click.option("--d", type=int, default=1)
@click.option("--r1", type=float, default=2.0)
@click.option("--r2", type=float, default=2.0)
@click.option("--c", type=float, required=True)
@click.option("--eps", type=float, required=True)
@click.option("--p-prime", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--delta", type=float, required=True)
@click.pass_context
def bracket_km(ctx, M, p, d, r1, r2, c, eps, p_prime, m, delta):
    try:
        profile = MomentProfile(p=p, M=M, center=np.zeros(d))
        br = build_km_bracket(profile, _quadratic_spec(r1, r2), c, eps, p_prime, m, delta)
        clamp = clamp_from_bracket(br, profile)
    except PreconditionError as exc:
        _fail(str(exc), 2)
    except InvalidArgumentError as exc:
        _fail(str(exc), 1)
    payload = {"R_B": br.R_B, "R_C": br.R_C, "R_C0": br.R_C0, "tau": br.tau,
               "u_coeff": br.u_coeff, "M_prime": br.M_prime,
               "eps_rho": br.eps_rho, "eps_rho_hat": br.eps_rho_hat,
               "clamp_R": clamp.R}
    click.echo(json.dumps(payload, indent=2))
    if ctx.obj.get("out"):
        os.makedirs(ctx.obj["out"], exist_ok=True)
        write_json(payload, os.path.join(ctx.obj["out"], "bracket_km.json"))


@bracket.command("gmm")
@click.option("--moment-bound", "M", type=float, required=True)
@click.option("--p", type=int, required=True)
@click.option("--d", type=int, default=1)
@click.option("--sigma1", type=float, required=True)
@click.option("--sigma2", type=float, required=True)
@click.option("--c", type=float, required=True)
@click.option("--eps", type=float, required=True)
@click.option("--p-prime", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--delta", type=float, required=True)
@click.pass_context
def bracket_gmm(ctx, M, p, d, sigma1, sigma2, c, eps, p_prime, m, delta):
    try:
        profile = MomentProfile(p=p, M=M, center=np.zeros(d))
        br = build_gmm_bracket(profile, sigma1, sigma2, c, eps, p_prime, m, delta)
    except PreconditionError as exc:
        _fail(str(exc), 2)
    except InvalidArgumentError as exc:
        _fail(str(exc), 1)
    payload = {"c_ell": br.c_ell, "p_max": br.p_max, "p0": br.p0,
               "log_p_min": br.log_p_min,
               "R1": br.R1, "R3": br.R3, "R4": br.R4, "R5": br.R5, "R6": br.R6,
               "R_B": br.R_B, "R_C": br.R_C, "M1": br.M1,
               "eps_rho_item1": br.eps_rho, "eps_rho_item2": 2.0 * br.eps,
               "eps_rho_hat": br.eps_rho_hat,
               "note": "item-1 scale is eps, item-2 scale 2*eps; bound assembly uses 2*eps"}
    click.echo(json.dumps(payload, indent=2))
    if ctx.obj.get("out"):
        os.makedirs(ctx.obj["out"], exist_ok=True)
        write_json(payload, os.path.join(ctx.obj["out"], "bracket_gmm.json"))


@main.group()
def cover():
    """Construct an epsilon-cover and report its size (optionally elements)."""


@cover.command("lp")
@click.option("--radius", "R", type=float, required=True)
@click.option("--d", type=int, required=True)
@click.option("--tau", type=float, required=True)
@click.option("--cap", type=int, default=10 ** 6)
@click.pass_context
def cover_lp(ctx, R, d, tau, cap):
    try:
        report = lp_ball_cover(R, d, tau, cap=cap)
    except InvalidArgumentError as exc:
        _fail(str(exc), 1)
    _emit_cover(ctx, report, "lp")


@cover.command("cov")
@click.option("--sigma1", type=float, required=True)
@click.option("--sigma2", type=float, required=True)
@click.option("--eps", type=float, required=True)
@click.option("--d", type=int, required=True)
@click.option("--cap", type=int, default=10 ** 6)
@click.pass_context
def cover_cov(ctx, sigma1, sigma2, eps, d, cap):
    try:
        report = covariance_cover(sigma1, sigma2, eps, d, cap=cap)
    except InvalidArgumentError as exc:
        _fail(str(exc), 1)
    _emit_cover(ctx, report, "cov")


@cover.command("mixture")
@click.option("--radius", "R", type=float, required=True)
@click.option("--radius2", "R2", type=float, required=True)
@click.option("--sigma1", type=float, required=True)
@click.option("--sigma2", type=float, required=True)
@click.option("--c1", type=float, required=True)
@click.option("--k", type=int, required=True)
@click.option("--eps", type=float, required=True)
@click.option("--d", type=int, required=True)
@click.option("--cap", type=int, default=10 ** 6)
@click.pass_context
def cover_mixture(ctx, R, R2, sigma1, sigma2, c1, k, eps, d, cap):
    try:
        report = mixture_cover(R, R2, sigma1, sigma2, c1, k, eps, d, cap=cap)
    except InvalidArgumentError as exc:
        _fail(str(exc), 1)
    _emit_cover(ctx, report, "mixture")


@main.group()
def fit():
    """Fit models to seeded draws from the configured distribution."""


@fit.command("lloyd")
@click.option("--restarts", type=int, default=None)
@click.pass_context
def fit_lloyd(ctx, restarts):
    cfg = _load_config(ctx)
    try:
        sample = draw(cfg.distribution, int(cfg.m), cfg.seed)
        spec = _bregman.squared_euclidean()
        cs = _bregman.lloyd_fit(spec, sample, cfg.k,
                                restarts=restarts or cfg.probes["restarts"],
                                seed=cfg.seed)
        cost = _bregman.mean_cost(spec, cs, sample)
    except (InvalidArgumentError, UnsupportedOrderError) as exc:
        _fail(str(exc), 1)
    payload = {"k": cfg.k, "cost": cost, "centers": cs.centers.tolist()}
    if not ctx.obj.get("quiet"):
        click.echo(json.dumps(payload, indent=2))
    if ctx.obj.get("out"):
        os.makedirs(ctx.obj["out"], exist_ok=True)
        write_json(payload, os.path.join(ctx.obj["out"], "centers.json"))


@fit.command("em")
@click.option("--restarts", type=int, default=None)
@click.pass_context
def fit_em(ctx, restarts):
    cfg = _load_config(ctx)
    try:
        sample = draw(cfg.distribution, int(cfg.m), cfg.seed)
        params = _gmm.em_fit(sample, cfg.k, cfg.sigma1, cfg.sigma2,
                             restarts=restarts or cfg.probes["restarts"],
                             seed=cfg.seed)
        ll = _gmm.mean_loglik(params, sample)
    except (InvalidArgumentError, UnsupportedOrderError) as exc:
        _fail(str(exc), 1)
    payload = {"k": cfg.k, "mean_loglik": ll,
               "weights": params.weights.tolist(),
               "means": params.means.tolist(),
               "covariances": params.covariances.tolist()}
    if not ctx.obj.get("quiet"):
        click.echo(json.dumps(payload, indent=2))
    if ctx.obj.get("out"):
        os.makedirs(ctx.obj["out"], exist_ok=True)
        write_json(payload, os.path.join(ctx.obj["out"], "gmm_params.json"))


@main.group()
def verify():
    """Monte Carlo bound-dominance verification."""


def _run_verify(ctx, runner):
    cfg = _load_config(ctx)
    try:
        report = runner(cfg)
    except PreconditionError as exc:
        _fail(str(exc), 2)
    except (InvalidArgumentError, UnsupportedOrderError) as exc:
        _fail(str(exc), 1)
    outdir = ctx.obj.get("out") or "out"
    write_verification(report, outdir)
    failure_prob = report.bound_terms.get("failure_prob", cfg.delta)
    floor = dominance_floor(failure_prob, cfg.trials)
    if not ctx.obj.get("quiet"):
        click.echo(f"dominance_fraction = {report.dominance_fraction:.4f} "
                   f"(acceptance floor {floor:.4f})")
        click.echo(f"wrote {outdir}/report.json, trials.csv")
    if report.dominance_fraction < floor:
        _fail(f"dominance fraction {report.dominance_fraction:.4f} "
              f"below acceptance floor {floor:.4f}", 3)


@verify.command("kmeans")
@click.pass_context
def verify_kmeans_cmd(ctx):
    _run_verify(ctx, verify_kmeans)


@verify.command("gmm")
@click.pass_context
def verify_gmm_cmd(ctx):
    _run_verify(ctx, verify_gmm)


@main.command("rates")
@click.pass_context
def rates_cmd(ctx):
    cfg = _load_config(ctx)
    try:
        report = rate_study(cfg)
    except PreconditionError as exc:
        _fail(str(exc), 2)
    except (InvalidArgumentError, UnsupportedOrderError) as exc:
        _fail(str(exc), 1)
    outdir = ctx.obj.get("out") or "out"
    write_verification(report, outdir)
    if not ctx.obj.get("quiet"):
        rf = report.rate_fit
        click.echo(f"observed slope {rf['observed_slope']:+.4f}, "
                   f"bound slope {rf['bound_slope']:+.4f}, "
                   f"rate exponent {rf['rate_exponent']:+.4f}")
        click.echo(f"wrote {outdir}/report.json, trials.csv, ratefit.csv")


@main.command("audit")
@click.option("--n-outer", type=int, default=10_000)
@click.option("--n-mass", type=int, default=100_000)
@click.option("--n-resample", type=int, default=100)
@click.pass_context
def audit_cmd(ctx, n_outer, n_mass, n_resample):
    cfg = _load_config(ctx)
    try:
        report = run_audit(cfg, n_outer=n_outer, n_mass=n_mass,
                           n_resample=n_resample)
    except PreconditionError as exc:
        _fail(str(exc), 2)
    except (InvalidArgumentError, UnsupportedOrderError) as exc:
        _fail(str(exc), 1)
    outdir = ctx.obj.get("out") or "out"
    write_audit(report, outdir)
    if not ctx.obj.get("quiet"):
        click.echo(f"dominance violations: {len(report['dominance']['violations'])}")
        for check in ("outer_mass", "truncation", "clamp_property"):
            if check in report:
                click.echo(f"{check} pass fraction: "
                           f"{report[check]['pass_fraction']:.3f}")
        click.echo(f"wrote {outdir}/report.json")


if __name__ == "__main__":
    main()
