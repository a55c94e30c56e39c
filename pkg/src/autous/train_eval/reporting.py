"""Metric-report emission: delimited tables, radar-chart data, loss curves."""

from __future__ import annotations

import json
import os

from ..exceptions import ValidationError
from .ablation import AblationTable
from .metrics import MetricsReport

METRICS_TABLE_NAME = "metrics.csv"
RADAR_DATA_NAME = "radar.json"
LOSS_CURVE_NAME = "loss_curve.csv"


def format_percent(value: float) -> str:
    return f"{100.0 * value:.2f}"


def emit_report(
    reports: dict[str, MetricsReport],
    destination: str,
    class_names: list[str],
) -> dict[str, str]:
    """Write the metrics table and radar data; returns the written paths.

    Undefined per-class AUC values appear as ``"n/a"`` in the radar data.
    """
    if not reports:
        raise ValidationError("emit_report needs at least one report")
    os.makedirs(destination, exist_ok=True)

    table_path = os.path.join(destination, METRICS_TABLE_NAME)
    lines = ["variant,accuracy,recall,precision"]
    for variant, report in reports.items():
        lines.append(
            f"{variant},{format_percent(report.accuracy)},"
            f"{format_percent(report.macro_recall)},"
            f"{format_percent(report.macro_precision)}"
        )
    _write(table_path, "\n".join(lines) + "\n")

    radar_path = os.path.join(destination, RADAR_DATA_NAME)
    radar: dict[str, dict[str, float | str]] = {}
    for class_id, name in enumerate(class_names):
        radar[name] = {}
        for variant, report in reports.items():
            auc = report.per_class_auc.get(class_id)
            radar[name][variant] = "n/a" if auc is None else round(auc, 6)
    _write(radar_path, json.dumps(radar, indent=2) + "\n")

    return {"metrics": table_path, "radar": radar_path}


def emit_ablation_report(
    table: AblationTable, destination: str, class_names: list[str]
) -> dict[str, str]:
    reports = {
        o.variant: o.metrics for o in table.rows() if o.metrics is not None
    }
    paths = emit_report(reports, destination, class_names)
    failures = {o.variant: o.error for o in table.rows() if o.error}
    if failures:
        fail_path = os.path.join(destination, "failures.json")
        _write(fail_path, json.dumps(failures, indent=2) + "\n")
        paths["failures"] = fail_path
    return paths


def write_loss_curve(curve: list[tuple[int, float]], path: str) -> None:
    lines = ["step,loss"]
    lines += [f"{step},{loss:.6f}" for step, loss in curve]
    _write(path, "\n".join(lines) + "\n")


def plot_radar(radar_path: str, out_path: str) -> None:
    """Render the radar-data file as a polar AUC chart (PNG)."""
    import math

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(radar_path, encoding="utf-8") as f:
        radar = json.load(f)
    classes = list(radar.keys())
    if not classes:
        raise ValidationError(f"{radar_path}: no classes in radar data")
    variants = sorted({v for per_class in radar.values() for v in per_class})

    angles = [2.0 * math.pi * i / len(classes) for i in range(len(classes))]
    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(6, 6))
    for variant in variants:
        values = []
        for name in classes:
            v = radar[name].get(variant, "n/a")
            values.append(float("nan") if v == "n/a" else float(v))
        ax.plot(angles + angles[:1], values + values[:1], label=variant, marker="o")
    ax.set_xticks(angles)
    ax.set_xticklabels(classes)
    ax.set_ylim(0.0, 1.0)
    ax.set_title("Per-class AUC")
    ax.legend(loc="lower right", bbox_to_anchor=(1.2, 0.0))
    fig.savefig(out_path, bbox_inches="tight", dpi=120)
    plt.close(fig)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
