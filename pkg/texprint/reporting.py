"""
Results table, JSON detail and SVG bar charts for a set of evaluation reports.
"""

import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from texprint.evaluation import EvalReport  # noqa: E402

RESULT_COLUMNS = ["classifier", "precision", "recall", "f_measure", "accuracy"]

CHART_STYLE = {
    "svg.fonttype": "none",
    "svg.hashsalt": "texprint",
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.bbox": "tight",
}


def results_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    """One row per learner, in the order given, rounded for stable text output."""
    rows = [
        {
            "classifier": report.display_name,
            "precision": round(report.precision, 6),
            "recall": round(report.recall, 6),
            "f_measure": round(report.f_measure, 6),
            "accuracy": round(report.accuracy, 6),
        }
        for report in reports
    ]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def write_results_csv(reports: Sequence[EvalReport], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    results_frame(reports).to_csv(path, index=False, float_format="%.6f")
    return path


def write_results_json(reports: Sequence[EvalReport], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump({"reports": [report.to_dict() for report in reports]}, f, indent=2, sort_keys=True)
    return path


def _save_svg(fig: plt.Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    # no Date entry, so reruns write identical files
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def accuracy_chart(reports: Sequence[EvalReport], path: Path | str) -> Path:
    """Bar per classifier, accuracy in percent."""
    with plt.rc_context(CHART_STYLE):
        fig, ax = plt.subplots(figsize=(7, 4))
        names = [report.display_name for report in reports]
        values = [100.0 * report.accuracy for report in reports]
        bars = ax.bar(names, values, color="#4C72B0", width=0.6)
        for bar, value in zip(bars, values):
            ax.annotate(
                f"{value:.1f}%",
                (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                ha="center",
                va="bottom",
                fontsize=8,
            )
        ax.set_ylim(0, 105)
        ax.set_ylabel("Accuracy (%)")
        ax.set_title("Cross-validated accuracy")
        return _save_svg(fig, Path(path))


def prf_chart(reports: Sequence[EvalReport], path: Path | str) -> Path:
    """Grouped precision / recall / F-measure bars per classifier."""
    series = [
        ("Precision", [r.precision for r in reports], "#4C72B0"),
        ("Recall", [r.recall for r in reports], "#DD8452"),
        ("F-measure", [r.f_measure for r in reports], "#55A868"),
    ]
    with plt.rc_context(CHART_STYLE):
        fig, ax = plt.subplots(figsize=(8, 4))
        x = np.arange(len(reports))
        width = 0.25
        for offset, (label, values, colour) in zip((-1, 0, 1), series):
            ax.bar(x + offset * width, values, width=width, label=label, color=colour)
        ax.set_xticks(x)
        ax.set_xticklabels([report.display_name for report in reports])
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("Weighted average")
        ax.set_title("Precision, recall and F-measure")
        ax.legend(frameon=False, ncol=3, loc="upper right")
        return _save_svg(fig, Path(path))


def format_ranking(reports: Sequence[EvalReport]) -> str:
    lines = []
    for position, report in enumerate(reports, start=1):
        lines.append(
            f"{position}. {report.display_name:<15} F={report.f_measure:.3f} "
            f"P={report.precision:.3f} R={report.recall:.3f} acc={report.accuracy:.3f}"
        )
    return "\n".join(lines)
