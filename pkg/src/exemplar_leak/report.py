"""Report emission: canonical JSON, per-fold CSV, and box-plot figures.

JSON is written with sorted keys and default float repr so identical
reports are byte-identical.  Figures are rendered with the Agg backend and
saved as SVG, one box plot per protocol with a dashed line at chance.
"""

from __future__ import annotations

import csv
import json
import os

from .audit import AuditReport, ComparisonReport
from .errors import DataError

AUDIT_JSON = "audit_report.json"
COMPARISON_JSON = "comparison_report.json"
ACCURACIES_CSV = "accuracies.csv"
DELTAS_CSV = "deltas.csv"


class IoError(DataError):
    pass


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _audit_part(report) -> AuditReport:
    return report.audit if isinstance(report, ComparisonReport) else report


def write_json(report, out_dir: str) -> str:
    name = (COMPARISON_JSON if isinstance(report, ComparisonReport)
            else AUDIT_JSON)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(report.to_dict()))
    return path


def write_csv(report, out_dir: str) -> list[str]:
    audit = _audit_part(report)
    paths = [os.path.join(out_dir, ACCURACIES_CSV)]
    with open(paths[0], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["protocol", "classifier", "subject", "fold",
                         "accuracy"])
        for r in audit.records:
            writer.writerow([r["protocol"], r["classifier"], r["subject"],
                             r["fold"], repr(r["accuracy"])])
    if isinstance(report, ComparisonReport):
        path = os.path.join(out_dir, DELTAS_CSV)
        paths.append(path)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["classifier", "delta", "ci_low", "ci_high",
                             "excludes_zero"])
            for name in audit.classifier_names:
                d = report.deltas[name]
                writer.writerow([name, repr(d["delta"]), repr(d["ci_low"]),
                                 repr(d["ci_high"]), d["excludes_zero"]])
    return paths


def write_box_plots(report, out_dir: str) -> list[str]:
    """One SVG box plot per protocol: a box per classifier, chance dashed."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    audit = _audit_part(report)
    protocols = list(audit.tests)
    paths = []
    for protocol in protocols:
        data = [audit.accuracies(protocol, name)
                for name in audit.classifier_names]
        fig, ax = plt.subplots(figsize=(1.8 + 1.2 * len(data), 4.0))
        ax.boxplot(data, tick_labels=audit.classifier_names, whis=1.5,
                   showfliers=True)
        ax.axhline(audit.chance, linestyle="--", color="tab:red",
                   linewidth=1.0, label=f"chance = {audit.chance:.4g}")
        ax.set_ylabel("fold accuracy")
        ax.set_title(protocol)
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        path = os.path.join(out_dir, f"boxplot_{protocol}.svg")
        fig.savefig(path, format="svg")
        plt.close(fig)
        paths.append(path)
    return paths


def emit_report(report, out_dir: str, formats=("json", "csv")) -> list[str]:
    """Write the requested formats into ``out_dir``; returns written paths."""
    unknown = set(formats) - {"json", "csv", "svg"}
    if unknown:
        raise IoError(f"unknown report formats: {sorted(unknown)}")
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        if "json" in formats:
            paths.append(write_json(report, out_dir))
        if "csv" in formats:
            paths.extend(write_csv(report, out_dir))
        if "svg" in formats:
            paths.extend(write_box_plots(report, out_dir))
        return paths
    except OSError as exc:
        raise IoError(f"cannot write report: {exc}") from exc
