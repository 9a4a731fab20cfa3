"""Figure rendering for evaluation reports.

The CSV stays the machine contract; these are the human-friendly views
written next to it.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import EvalReport  # noqa: E402


def render_assignment_figure(report: EvalReport, out_dir) -> Path:
    """Bar chart of frame-weighted assignment accuracy per method."""
    methods = ["random", "search", "oracle"]
    values = [report.aggregates[f"{m}_accuracy"] for m in methods]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    bars = ax.bar(methods, values, color=["#999999", "#2a6fbb", "#55a868"])
    ax.set_ylabel("assignment accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title("Segment assignment, 0 dB mixtures")
    for bar, v in zip(bars, values):
        ax.annotate(f"{v:.1f}", (bar.get_x() + bar.get_width() / 2, v),
                    ha="center", va="bottom", fontsize=9)
    fig.tight_layout()
    path = Path(out_dir) / "assignment_accuracy.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_sid_figure(report: EvalReport, out_dir) -> Path:
    """Correct-identification rate against TIR for both methods."""
    tirs = sorted({row["tir_db"] for row in report.rows})
    baseline = [report.aggregates[f"baseline_rate_tir_{t:g}"] for t in tirs]
    proposed = [report.aggregates[f"proposed_rate_tir_{t:g}"] for t in tirs]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(tirs, baseline, "o--", color="#999999", label="baseline (whole mixture)")
    ax.plot(tirs, proposed, "s-", color="#2a6fbb", label="usable segments + pair search")
    ax.set_xlabel("target-to-interferer ratio (dB)")
    ax.set_ylabel("target identified (%)")
    ax.set_ylim(-2, 105)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower right", fontsize=9)
    fig.tight_layout()
    path = Path(out_dir) / "sid_correct_rate.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(report: EvalReport, out_dir) -> list[Path]:
    if report.kind == "assignment":
        return [render_assignment_figure(report, out_dir)]
    if report.kind == "sid":
        return [render_sid_figure(report, out_dir)]
    raise ValueError(f"unknown report kind: {report.kind}")
