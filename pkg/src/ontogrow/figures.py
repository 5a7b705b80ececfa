"""Matplotlib renderings written alongside the delimited report outputs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .stats import ConfusionMatrix, InsertionEvalReport, MetricsReport, METHODS


def render_confusion_matrix(
    cm: ConfusionMatrix, metrics: MetricsReport, path: str | Path
) -> Path:
    """2x2 confusion matrix heatmap with the derived metrics as a caption."""
    path = Path(path)
    grid = [[cm.tp, cm.fn], [cm.fp, cm.tn]]
    fig, ax = plt.subplots(figsize=(4.8, 4.2))
    ax.imshow(grid, cmap="Blues")
    for i, row in enumerate(grid):
        for j, value in enumerate(row):
            ax.text(j, i, str(value), ha="center", va="center", fontsize=16)
    ax.set_xticks([0, 1], ["Predicted yes", "Predicted no"])
    ax.set_yticks([0, 1], ["Actual yes", "Actual no"])
    ax.set_title("Atomic sentence classification")

    def _fmt(v):
        return "n/a" if v is None else f"{v:.2f}"

    caption = (
        f"accuracy {_fmt(metrics.accuracy)}  sensitivity {_fmt(metrics.sensitivity)}  "
        f"specificity {_fmt(metrics.specificity)}\n"
        f"precision {_fmt(metrics.precision)}  MCC {_fmt(metrics.mcc)}"
    )
    fig.text(0.5, 0.02, caption, ha="center", fontsize=9)
    fig.tight_layout(rect=(0, 0.08, 1, 1))
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_step_comparison(report: InsertionEvalReport, path: str | Path) -> Path:
    """Per-noun step counts per method, one panel per cohort, with the
    per-method averages in the legend."""
    path = Path(path)
    cohorts = [c for c in ("other", "mapped") if c in report.averages]
    fig, axes = plt.subplots(
        1, max(len(cohorts), 1), figsize=(6.4 * max(len(cohorts), 1), 4.4), squeeze=False
    )
    width = 0.2
    for ax, cohort in zip(axes[0], cohorts):
        records = [r for r in report.records if r.cohort() == cohort]
        xs = range(len(records))
        for k, method in enumerate(METHODS):
            avg = report.averages[cohort][method]
            ax.bar(
                [x + (k - 1.5) * width for x in xs],
                [r.steps_by_method[method] for r in records],
                width=width,
                label=f"M{method} (avg {avg:.2f})",
            )
        ax.set_xticks(list(xs), [r.noun for r in records], rotation=45, ha="right")
        ax.set_ylabel("steps (M3: per inserted concept)")
        ax.set_title(f"{cohort} entity types")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
