"""Report rendering: the delimited stage table plus matplotlib figures
written alongside it (level profiles, converted scores, the stage chain,
and the regulatory-support quadrant chart)."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .fixtures import load_framework
from .framework import AssessmentRecord, FrameworkDefinition, WeightTable
from .pipeline import MODES, converted_scores, run_pipeline
from .valuation import QuadrantPosition

DIMENSION_LABELS = {"capability": "Capability", "adoption": "Adoption", "utility": "Utility"}

_RATE_STAGES = {"adoption_rate", "utility_rate"}
_STAGE_FIELDS = (
    "capability_score",
    "adoption_rate",
    "effective_capability",
    "utility_rate",
    "final_value",
)


def stage_table_rows(
    assessment: AssessmentRecord,
    weights: WeightTable,
    framework: FrameworkDefinition | None = None,
) -> list[dict]:
    """Stage table covering both chain modes, canonically formatted
    (2 decimals for scores, 4 for rates)."""
    framework = framework or load_framework()
    rows = []
    for mode in MODES:
        scores = run_pipeline(assessment, weights, mode, framework)
        display = scores.display_dict()
        for stage in _STAGE_FIELDS:
            rows.append(
                {
                    "assessment_id": assessment.assessment_id,
                    "mode": mode,
                    "stage": stage,
                    "value": display[stage],
                }
            )
    return rows


def write_stage_table_csv(
    path: str | Path,
    assessment: AssessmentRecord,
    weights: WeightTable,
    framework: FrameworkDefinition | None = None,
) -> Path:
    path = Path(path)
    rows = stage_table_rows(assessment, weights, framework)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=["assessment_id", "mode", "stage", "value"])
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_whatif_csv(path: str | Path, report) -> Path:
    """Marginal-delta table for a what-if report."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["criterion", "old_level", "new_level", "stage", "stage_delta", "final_value_delta"]
        )
        for marginal in report.marginals:
            writer.writerow(
                [
                    marginal.criterion,
                    marginal.old_level,
                    marginal.new_level,
                    marginal.stage,
                    f"{marginal.stage_delta:.6f}",
                    f"{marginal.final_value_delta:.6f}",
                ]
            )
    return path


def write_opportunity_csv(path: str | Path, ranks) -> Path:
    """Value-density opportunity ranking."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["assessment_id", "final_value", "vdc_level", "opportunity_score"])
        for rank in ranks:
            writer.writerow(
                [
                    rank.assessment_id,
                    f"{rank.final_value:.2f}",
                    rank.vdc_level,
                    f"{rank.opportunity_score:.2f}",
                ]
            )
    return path


def write_trend_csv(path: str | Path, trend) -> Path:
    """Stage deltas between consecutive assessments of a trend report."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "from_created_at",
                "to_created_at",
                "capability_delta",
                "adoption_rate_delta",
                "effective_delta",
                "utility_rate_delta",
                "final_value_delta",
            ]
        )
        for step in trend.steps:
            writer.writerow(
                [
                    step.from_created_at,
                    step.to_created_at,
                    f"{step.capability_delta:.4f}",
                    f"{step.adoption_rate_delta:.6f}",
                    f"{step.effective_delta:.4f}",
                    f"{step.utility_rate_delta:.6f}",
                    f"{step.final_value_delta:.4f}",
                ]
            )
    return path


def _dimension_bars(axis, labels: Sequence[str], values: Sequence[float], title: str, ymax: float):
    axis.bar(range(len(labels)), values, color="#4878a8")
    axis.set_xticks(range(len(labels)))
    axis.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    axis.set_ylim(0, ymax)
    axis.set_title(title, fontsize=10)
    axis.grid(axis="y", alpha=0.3)


def render_level_profile(
    assessment: AssessmentRecord,
    outdir: str | Path,
    framework: FrameworkDefinition | None = None,
) -> Path:
    """Pre-conversion rating levels per dimension (three panels)."""
    framework = framework or load_framework()
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    for axis, dim in zip(axes, ("capability", "adoption", "utility")):
        criteria = framework.criteria_of_dimension(dim)
        labels = [c.display_name for c in criteria]
        values = [assessment.level(c.id) for c in criteria]
        _dimension_bars(axis, labels, values, DIMENSION_LABELS[dim], ymax=5.5)
        axis.set_ylabel("level (1-5)")
    fig.suptitle(f"Rating levels: {assessment.assessment_id}")
    fig.tight_layout()
    path = Path(outdir) / f"levels_{assessment.assessment_id}.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def render_converted_scores(
    assessment: AssessmentRecord,
    weights: WeightTable,
    outdir: str | Path,
    mode: str = "reported",
    framework: FrameworkDefinition | None = None,
) -> Path:
    """Per-criterion converted scores for each stage (three panels)."""
    framework = framework or load_framework()
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    for axis, dim in zip(axes, ("capability", "adoption", "utility")):
        rows = converted_scores(assessment, weights, dim, mode, framework)
        labels = [framework.criterion(r.criterion).display_name for r in rows]
        values = [r.converted for r in rows]
        ymax = max(20.0, max(values) * 1.2)
        _dimension_bars(axis, labels, values, DIMENSION_LABELS[dim], ymax=ymax)
        axis.set_ylabel("converted score")
    fig.suptitle(f"Converted scores ({mode} mode): {assessment.assessment_id}")
    fig.tight_layout()
    path = Path(outdir) / f"converted_{assessment.assessment_id}_{mode}.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def render_stage_chain(
    assessment: AssessmentRecord,
    weights: WeightTable,
    outdir: str | Path,
    framework: FrameworkDefinition | None = None,
) -> Path:
    """Capability → effective → final with both chain finals side by side."""
    framework = framework or load_framework()
    scores = run_pipeline(assessment, weights, "reported", framework)
    labels = [
        "Capability",
        f"Effective\n(× {scores.adoption_rate * 100:.2f}%)",
        f"Final, strict chain\n(× {scores.utility_rate * 100:.2f}%)",
        "Final, squared-\nadoption chain",
    ]
    values = [
        scores.capability_score,
        scores.effective_capability,
        scores.final_value_appendix,
        scores.final_value_reported,
    ]
    fig, axis = plt.subplots(figsize=(7, 4.5))
    bars = axis.bar(range(4), values, color=["#4878a8", "#6b9bc3", "#8abf9e", "#50946b"])
    for bar, value in zip(bars, values):
        axis.annotate(
            f"{value:.2f}",
            (bar.get_x() + bar.get_width() / 2, value),
            ha="center",
            va="bottom",
            fontsize=9,
        )
    axis.set_xticks(range(4))
    axis.set_xticklabels(labels, fontsize=8)
    axis.set_ylim(0, 105)
    axis.set_ylabel("score (0-100)")
    axis.set_title(f"Value chain: {assessment.assessment_id}")
    axis.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    path = Path(outdir) / f"chain_{assessment.assessment_id}.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def render_quadrant_chart(
    position: QuadrantPosition,
    outdir: str | Path,
    thresholds: tuple[float, float] = (50.0, 50.0),
) -> Path:
    """2×2 regulatory-support grid with the classified point marked."""
    fig, axis = plt.subplots(figsize=(6, 6))
    tx, ty = thresholds
    cells = [
        (tx, ty, 100 - tx, 100 - ty, "OptimalConditions", "#d3e6d8"),
        (tx, 0, 100 - tx, ty, "FocusedCompliance", "#f3e3cd"),
        (0, ty, tx, 100 - ty, "SupportDriven", "#d6e4f0"),
        (0, 0, tx, ty, "Unconstrained", "#eeeeee"),
    ]
    for x, y, width, height, label, color in cells:
        axis.add_patch(plt.Rectangle((x, y), width, height, color=color))
        axis.text(x + width / 2, y + height / 2, label, ha="center", va="center", fontsize=9)
    axis.axvline(tx, color="gray", linewidth=1)
    axis.axhline(ty, color="gray", linewidth=1)
    axis.plot(
        [position.regulatory_intensity], [position.support_level], "o", color="#b03030", markersize=10
    )
    axis.set_xlim(0, 100)
    axis.set_ylim(0, 100)
    axis.set_xlabel("regulatory intensity")
    axis.set_ylabel("government support")
    axis.set_title(f"Quadrant: {position.quadrant}")
    fig.tight_layout()
    path = Path(outdir) / "quadrant.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def render_report(
    assessment: AssessmentRecord,
    weights: WeightTable,
    outdir: str | Path,
    mode: str = "reported",
    quadrant: QuadrantPosition | None = None,
    framework: FrameworkDefinition | None = None,
) -> list[Path]:
    """Full report bundle: stage-table CSV and all figures."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    framework = framework or load_framework()
    written = [
        write_stage_table_csv(
            outdir / f"stages_{assessment.assessment_id}.csv", assessment, weights, framework
        ),
        render_level_profile(assessment, outdir, framework),
        render_converted_scores(assessment, weights, outdir, mode, framework),
        render_stage_chain(assessment, weights, outdir, framework),
    ]
    if quadrant is not None:
        written.append(render_quadrant_chart(quadrant, outdir))
    return written
