"""Render evaluation reports to files: per-variant records as CSV and
summary figures as PNG."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .corpus import DomainStats
from .evaluator import EvalRecord, Metrics


def write_records_csv(records: Sequence[EvalRecord], path: Path) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(
            handle, fieldnames=["itemId", "variant", "choice", "correct", "error"]
        )
        writer.writeheader()
        for record in records:
            writer.writerow(record.to_dict())
    return path


def render_metrics_figures(metrics: Metrics, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(4.0, 3.0))
    ax.bar(
        ["accuracy", "robust accuracy"],
        [metrics.accuracy, metrics.robust_accuracy],
        color=["#4878a8", "#a84848"],
    )
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("fraction correct")
    ax.set_title(f"accuracy vs robust accuracy (n={metrics.n})")
    for i, value in enumerate([metrics.accuracy, metrics.robust_accuracy]):
        ax.text(i, value + 0.02, f"{value:.3f}", ha="center", fontsize=9)
    fig.tight_layout()
    path = out_dir / "accuracy.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    if metrics.per_variant:
        kinds = list(metrics.per_variant)
        values = [metrics.per_variant[k]["accuracy"] for k in kinds]
        fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(kinds)), 3.0))
        ax.bar(kinds, values, color="#6a8f5f")
        ax.set_ylim(0.0, 1.05)
        ax.set_ylabel("accuracy")
        ax.set_title("accuracy per variant kind")
        ax.tick_params(axis="x", rotation=20)
        fig.tight_layout()
        path = out_dir / "variant_breakdown.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written


def render_stats_figure(stats: DomainStats, out_dir: Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(4.0, 3.0))
    labels = ["total", "name candidates", "paired"]
    values = [stats.total, stats.name_candidate_count, stats.paired_count]
    ax.bar(labels, values, color=["#777777", "#4878a8", "#6a8f5f"])
    ax.set_ylabel("items")
    ax.set_title("domain composition")
    for i, value in enumerate(values):
        ax.text(i, value + 0.1, str(value), ha="center", fontsize=9)
    fig.tight_layout()
    path = out_dir / "domain_stats.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
