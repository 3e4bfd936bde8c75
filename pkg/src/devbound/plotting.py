"""Figure rendering for verification reports (Agg backend, file output only)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def fig_deviation_vs_bound(trials, path):
    """Per-trial observed sup deviation against the computed bound."""
    idx = [row["trial"] for row in trials]
    devs = [row["deviation"] for row in trials]
    bounds = [row["bound"] for row in trials]
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    ax.semilogy(idx, devs, ".", ms=4, label="observed sup deviation")
    ax.semilogy(idx, bounds, "-", lw=1.2, color="C3", label="bound")
    ax.set_xlabel("trial")
    ax.set_ylabel("deviation")
    ax.legend(loc="center right", fontsize=8)
    ax.set_title("deviation vs bound", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fig_ratefit(rate_fit, path):
    """Log-log medians and bound values over the m-grid with fitted slopes."""
    rows = rate_fit["rows"]
    m = np.array([row["m"] for row in rows], dtype=float)
    med = np.array([row["median_dev"] for row in rows])
    bound = np.array([row["bound"] for row in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(m, med, "o-", label=f"median deviation (slope {rate_fit['observed_slope']:.3f})")
    ax.loglog(m, bound, "s--", color="C3",
              label=f"bound (slope {rate_fit['bound_slope']:.3f})")
    ref = med[0] * (m / m[0]) ** rate_fit["rate_exponent"]
    ax.loglog(m, ref, ":", color="gray",
              label=f"rate exponent {rate_fit['rate_exponent']:.3f}")
    ax.set_xlabel("m")
    ax.set_ylabel("deviation")
    ax.legend(fontsize=8)
    ax.set_title("rate study", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fig_audit_margins(audit_report, path):
    """Pass fractions and dominance margins from a bracket/clamp audit."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.5, 3.2))
    checks = [c for c in ("outer_mass", "truncation", "clamp_property")
              if c in audit_report]
    if checks:
        fracs = [audit_report[c]["pass_fraction"] for c in checks]
        ax1.bar(range(len(checks)), fracs, color="C0")
        ax1.axhline(0.95, color="C3", ls="--", lw=1)
        ax1.set_xticks(range(len(checks)))
        ax1.set_xticklabels([c.replace("_", "\n") for c in checks], fontsize=8)
        ax1.set_ylim(0.0, 1.05)
        ax1.set_ylabel("pass fraction")
    else:
        ax1.set_axis_off()
        ax1.text(0.5, 0.5, "no mass checks\n(gmm bracket audit)",
                 ha="center", va="center", fontsize=9)
    dom = audit_report["dominance"]
    margins = [dom["min_margin_upper"], dom["min_margin_lower"]]
    ax2.bar([0, 1], margins, color=["C2" if v >= 0 else "C3" for v in margins])
    ax2.set_xticks([0, 1])
    ax2.set_xticklabels(["upper\nmargin", "lower\nmargin"], fontsize=8)
    ax2.axhline(0.0, color="k", lw=0.8)
    ax2.set_ylabel("worst dominance margin")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
