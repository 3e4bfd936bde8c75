"""Deterministic report writers: JSON, delimited output, and figures.

report.json and the CSV files must be byte-identical across reruns with the
same config and seed, so floats are serialized with repr (shortest
round-trip form) and key order is fixed by construction.  Figures are
rendered alongside the delimited output on every report path.
"""

import csv
import json
import os

from . import plotting


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def write_trials_csv(trials, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "m", "deviation", "bound", "margin"])
        for row in trials:
            writer.writerow([row["trial"], row["m"], repr(row["deviation"]),
                             repr(row["bound"]), repr(row["margin"])])


def write_ratefit_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "median_dev", "bound"])
        for row in rows:
            writer.writerow([row["m"], repr(row["median_dev"]), repr(row["bound"])])


def write_verification(report, outdir, figures=True):
    """Write report.json + trials.csv (+ ratefit.csv) and render figures."""
    os.makedirs(outdir, exist_ok=True)
    write_json(report.to_dict(), os.path.join(outdir, "report.json"))
    write_trials_csv(report.trials, os.path.join(outdir, "trials.csv"))
    if report.rate_fit is not None:
        write_ratefit_csv(report.rate_fit["rows"],
                          os.path.join(outdir, "ratefit.csv"))
        if figures:
            plotting.fig_ratefit(report.rate_fit,
                                 os.path.join(outdir, "ratefit.png"))
    elif figures and report.trials:
        plotting.fig_deviation_vs_bound(
            report.trials, os.path.join(outdir, "deviation_vs_bound.png"))


def write_audit(audit_report, outdir, figures=True):
    os.makedirs(outdir, exist_ok=True)
    write_json(audit_report, os.path.join(outdir, "report.json"))
    if figures:
        plotting.fig_audit_margins(audit_report,
                                   os.path.join(outdir, "audit_margins.png"))
