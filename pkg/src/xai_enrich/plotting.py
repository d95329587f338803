"""Matplotlib rendering of evaluation reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import SECTION_TITLES, EvaluationReport, Section  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 150,
    "svg.hashsalt": "xai-enrich",
}


def plot_report(reports: Sequence[EvaluationReport], path: str | Path) -> Path:
    """Grouped bar chart, one panel per section, bars per run.

    Missing values ("no data") are left as gaps.
    """
    path = Path(path)
    ks = sorted({k for r in reports for k in r.ks})
    metrics = [(m, k) for m in ("P", "RDE") for k in ks]
    width = 0.8 / max(len(reports), 1)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(Section), figsize=(3.0 * len(Section), 2.8), sharey=True)
        for ax, section in zip(axes, Section):
            for j, rep in enumerate(reports):
                xs, ys = [], []
                for i, (metric, k) in enumerate(metrics):
                    try:
                        row = rep.row(section, k)
                    except KeyError:
                        continue
                    value = row.average_precision if metric == "P" else row.rde
                    if value is not None:
                        xs.append(i + (j - (len(reports) - 1) / 2) * width)
                        ys.append(float(value))
                ax.bar(xs, ys, width=width, label=rep.label)
            ax.set_title(SECTION_TITLES[section])
            ax.set_xticks(range(len(metrics)))
            ax.set_xticklabels([f"{m}@{k}" for m, k in metrics])
            ax.set_ylim(0, 1.05)
        axes[0].set_ylabel("score")
        if len(reports) > 1:
            axes[-1].legend(loc="upper right")
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, metadata={"Software": None} if path.suffix == ".png" else None)
        plt.close(fig)
    return path
