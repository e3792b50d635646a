"""Value quantification and implementation-pathway analytics: the man-hour
value model, value-density coefficient, regulatory-support quadrant
classification, opportunity ranking, capability/adoption gap analysis,
what-if interventions, and longitudinal value tracking.

Everything here is a pure function; sweeps over assessments or intervention
sets parallelize freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ValidationError
from .fixtures import load_framework
from .framework import AssessmentRecord, FrameworkDefinition, WeightTable, level_to_score
from .pipeline import DEFAULT_MODE, StageScores, converted_scores, run_pipeline

# -- man-hour value model ------------------------------------------------------


@dataclass(frozen=True)
class ManHourModel:
    """Translates stage scores into labor-equivalent value:
    base_rate × efficiency × risk_weight, where efficiency is the convex
    combination (a·capability + b·effective + c·final)/100.

    risk_weight is a raw multiplier in (0, 2]: 1 is risk-neutral; values
    above 1 amplify and values below 1 discount, depending on whether the
    caller treats implementation risk as upside exposure or as a penalty.
    """

    base_rate: float
    dimension_weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    risk_weight: float = 1.0

    def __post_init__(self):
        a, b, c = self.dimension_weights
        if min(a, b, c) < 0:
            raise ValidationError("dimension weights must be non-negative")
        if abs(a + b + c - 1.0) > 1e-9:
            raise ValidationError(
                f"dimension weights must sum to 1, got {a + b + c!r}"
            )
        if not 0 < self.risk_weight <= 2:
            raise ValidationError(
                f"risk_weight must be in (0, 2], got {self.risk_weight}"
            )
        if self.base_rate <= 0:
            raise ValidationError(f"base_rate must be positive, got {self.base_rate}")


def man_hour_value(model: ManHourModel, scores: StageScores) -> float:
    """Currency-per-hour equivalent for one pipeline result."""
    a, b, c = model.dimension_weights
    efficiency = (
        a * scores.capability_score
        + b * scores.effective_capability
        + c * scores.final_value
    ) / 100.0
    return model.base_rate * efficiency * model.risk_weight


# -- value density coefficient -------------------------------------------------


@dataclass(frozen=True)
class VDCInputs:
    task_criticality: int
    knowledge_concentration: int
    risk_exposure: int

    def __post_init__(self):
        level_to_score(self.task_criticality, criterion="task_criticality")
        level_to_score(self.knowledge_concentration, criterion="knowledge_concentration")
        level_to_score(self.risk_exposure, criterion="risk_exposure")


@dataclass(frozen=True)
class VDCResult:
    score: float
    level: int

    def to_json_dict(self) -> dict:
        return {"score": self.score, "level": self.level}


def value_density_coefficient(inputs: VDCInputs) -> VDCResult:
    """Geometric mean of the three component level scores, snapped up to the
    nearest level on the 20-point grid. The geometric mean deliberately
    penalizes imbalance: concentrated value needs all three components."""
    scores = (
        level_to_score(inputs.task_criticality),
        level_to_score(inputs.knowledge_concentration),
        level_to_score(inputs.risk_exposure),
    )
    geo = math.prod(scores) ** (1.0 / 3.0)
    level = min(5, math.ceil(geo / 20.0 - 1e-9))
    return VDCResult(score=geo, level=level)


# -- regulatory-support quadrant -----------------------------------------------

QUADRANTS = ("OptimalConditions", "FocusedCompliance", "SupportDriven", "Unconstrained")

QUADRANT_STRATEGIES = {
    "OptimalConditions": (
        "Compliance requirements align with available assistance: pursue "
        "comprehensive inspection coverage."
    ),
    "FocusedCompliance": (
        "Strong obligations with little assistance: focus spend on the "
        "critical inspection points that carry compliance risk."
    ),
    "SupportDriven": (
        "Assistance outpaces obligation: let incentive programs pull "
        "deployments where value density is highest."
    ),
    "Unconstrained": (
        "Neither obligations nor assistance dominate: sequence adoption "
        "purely on internal return."
    ),
}


@dataclass(frozen=True)
class QuadrantPosition:
    regulatory_intensity: float
    support_level: float
    quadrant: str
    strategy_note: str

    def to_json_dict(self) -> dict:
        return {
            "regulatory_intensity": self.regulatory_intensity,
            "support_level": self.support_level,
            "quadrant": self.quadrant,
            "strategy_note": self.strategy_note,
        }


def classify_quadrant(
    regulatory_intensity: float,
    support_level: float,
    thresholds: tuple[float, float] = (50.0, 50.0),
) -> QuadrantPosition:
    """Threshold classification on the 0..100 square; values at a threshold
    count as high, so the partition is total and deterministic."""
    for name, value in (
        ("regulatory_intensity", regulatory_intensity),
        ("support_level", support_level),
    ):
        if not 0 <= value <= 100:
            raise ValidationError(f"{name} must be in 0..100, got {value}")
    high_reg = regulatory_intensity >= thresholds[0]
    high_sup = support_level >= thresholds[1]
    quadrant = {
        (True, True): "OptimalConditions",
        (True, False): "FocusedCompliance",
        (False, True): "SupportDriven",
        (False, False): "Unconstrained",
    }[(high_reg, high_sup)]
    return QuadrantPosition(
        regulatory_intensity=regulatory_intensity,
        support_level=support_level,
        quadrant=quadrant,
        strategy_note=QUADRANT_STRATEGIES[quadrant],
    )


def quadrant_grid(thresholds: tuple[float, float] = (50.0, 50.0)) -> list[dict]:
    """4-cell grid payload for chart rendering."""
    cells = [
        ("OptimalConditions", "high", "high"),
        ("FocusedCompliance", "high", "low"),
        ("SupportDriven", "low", "high"),
        ("Unconstrained", "low", "low"),
    ]
    return [
        {
            "quadrant": name,
            "regulatory": reg,
            "support": sup,
            "strategy_note": QUADRANT_STRATEGIES[name],
            "thresholds": {"regulatory": thresholds[0], "support": thresholds[1]},
        }
        for name, reg, sup in cells
    ]


# -- pathway stage 1: value density mapping -------------------------------------


@dataclass(frozen=True)
class OpportunityRank:
    assessment_id: str
    final_value: float
    vdc_level: int
    opportunity_score: float

    def to_json_dict(self) -> dict:
        return {
            "assessment_id": self.assessment_id,
            "final_value": self.final_value,
            "vdc_level": self.vdc_level,
            "opportunity_score": self.opportunity_score,
        }


def value_density_mapping(
    entries: Sequence[tuple[AssessmentRecord, WeightTable]],
    framework: FrameworkDefinition | None = None,
) -> list[OpportunityRank]:
    """Rank assessment opportunities by reported-chain final value scaled by
    the value-density criterion's level score; ties fall back to
    assessment_id so the ordering is stable."""
    if not entries:
        raise ValidationError("value density mapping needs at least one assessment")
    framework = framework or load_framework()
    ranks = []
    for assessment, weights in entries:
        scores = run_pipeline(assessment, weights, "reported", framework)
        vdc_level = assessment.level("value_density_coefficient")
        ranks.append(
            OpportunityRank(
                assessment_id=assessment.assessment_id,
                final_value=scores.final_value_reported,
                vdc_level=vdc_level,
                opportunity_score=scores.final_value_reported
                * level_to_score(vdc_level)
                / 100.0,
            )
        )
    ranks.sort(key=lambda r: (-r.opportunity_score, r.assessment_id))
    return ranks


# -- pathway stage 2: capability/adoption gap ------------------------------------


@dataclass(frozen=True)
class LimitingFactor:
    criterion: str
    level: int
    converted: float

    def to_json_dict(self) -> dict:
        return {"criterion": self.criterion, "level": self.level, "converted": self.converted}


@dataclass(frozen=True)
class GapReport:
    assessment_id: str
    capability_fraction: float
    adoption_rate: float
    gap: float
    limiting_factors: tuple[LimitingFactor, ...]

    def to_json_dict(self) -> dict:
        return {
            "assessment_id": self.assessment_id,
            "capability_fraction": self.capability_fraction,
            "adoption_rate": self.adoption_rate,
            "gap": self.gap,
            "limiting_factors": [f.to_json_dict() for f in self.limiting_factors],
        }


def capability_adoption_gap(
    assessment: AssessmentRecord,
    weights: WeightTable,
    k: int = 3,
    framework: FrameworkDefinition | None = None,
) -> GapReport:
    """Gap between technical capability (as a fraction) and the adoption
    conversion rate, plus the k lowest-converted adoption criteria as the
    limiting factors to intervene on."""
    framework = framework or load_framework()
    scores = run_pipeline(assessment, weights, "reported", framework)
    converted = converted_scores(assessment, weights, "adoption", "reported", framework)
    worst = sorted(converted, key=lambda c: (c.converted, c.criterion))[:k]
    return GapReport(
        assessment_id=assessment.assessment_id,
        capability_fraction=scores.capability_score / 100.0,
        adoption_rate=scores.adoption_rate,
        gap=scores.capability_score / 100.0 - scores.adoption_rate,
        limiting_factors=tuple(
            LimitingFactor(c.criterion, assessment.level(c.criterion), c.converted)
            for c in worst
        ),
    )


# -- what-if interventions -------------------------------------------------------


@dataclass(frozen=True)
class Intervention:
    criterion: str
    new_level: int


@dataclass(frozen=True)
class MarginalDelta:
    criterion: str
    old_level: int
    new_level: int
    stage: str
    stage_delta: float  # change in the criterion's own stage value
    final_value_delta: float  # change in the mode's final when applied alone

    def to_json_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "old_level": self.old_level,
            "new_level": self.new_level,
            "stage": self.stage,
            "stage_delta": self.stage_delta,
            "final_value_delta": self.final_value_delta,
        }


@dataclass(frozen=True)
class WhatIfReport:
    assessment_id: str
    mode: str
    before: StageScores
    after: StageScores
    marginals: tuple[MarginalDelta, ...]

    @property
    def combined_final_delta(self) -> float:
        return self.after.final_value - self.before.final_value

    def to_json_dict(self) -> dict:
        return {
            "assessment_id": self.assessment_id,
            "mode": self.mode,
            "before": self.before.to_json_dict(),
            "after": self.after.to_json_dict(),
            "combined_final_delta": self.combined_final_delta,
            "marginals": [m.to_json_dict() for m in self.marginals],
        }


def what_if(
    assessment: AssessmentRecord,
    weights: WeightTable,
    mode: str = DEFAULT_MODE,
    interventions: Sequence[Intervention | tuple[str, int]] = (),
    framework: FrameworkDefinition | None = None,
) -> WhatIfReport:
    """Recompute the pipeline under proposed level changes.

    ``after`` applies all interventions together; ``marginals`` report each
    intervention applied alone, ordered by descending final-value delta.
    Stacked interventions are not additive across stages, which is why both
    views are returned.
    """
    framework = framework or load_framework()
    normalized: list[Intervention] = []
    for idx, item in enumerate(interventions):
        iv = item if isinstance(item, Intervention) else Intervention(*item)
        if iv.criterion not in assessment.ratings:
            raise ValidationError(
                f"unknown criterion '{iv.criterion}'",
                field_path=f"interventions[{idx}].criterion",
            )
        level_to_score(iv.new_level, criterion=iv.criterion)
        normalized.append(iv)

    before = run_pipeline(assessment, weights, mode, framework)

    stage_value = {
        "capability": lambda s: s.capability_score,
        "adoption": lambda s: s.adoption_rate,
        "utility": lambda s: s.utility_rate,
    }
    marginals = []
    for iv in normalized:
        alone = run_pipeline(
            assessment.with_levels({iv.criterion: iv.new_level}), weights, mode, framework
        )
        stage = framework.dimension_of(iv.criterion)
        marginals.append(
            MarginalDelta(
                criterion=iv.criterion,
                old_level=assessment.level(iv.criterion),
                new_level=iv.new_level,
                stage=stage,
                stage_delta=stage_value[stage](alone) - stage_value[stage](before),
                final_value_delta=alone.final_value - before.final_value,
            )
        )
    marginals.sort(key=lambda m: (-m.final_value_delta, m.criterion))

    combined_levels = {iv.criterion: iv.new_level for iv in normalized}
    after = run_pipeline(
        assessment.with_levels(combined_levels) if combined_levels else assessment,
        weights,
        mode,
        framework,
    )
    return WhatIfReport(
        assessment_id=assessment.assessment_id,
        mode=mode,
        before=before,
        after=after,
        marginals=tuple(marginals),
    )


# -- pathway stage 3: progressive implementation ---------------------------------

#: How much to trust a criterion's current level when ordering interventions.
LEVEL_CONFIDENCE = {"paper_stated": 1.0, "user_entered": 0.9, "oracle_fitted": 0.75}
DEFAULT_LEVEL_CONFIDENCE = 0.9


@dataclass(frozen=True)
class ProgressiveStep:
    criterion: str
    from_level: int
    to_level: int
    final_value_delta: float
    confidence: float
    priority: float  # final_value_delta × confidence

    def to_json_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "from_level": self.from_level,
            "to_level": self.to_level,
            "final_value_delta": self.final_value_delta,
            "confidence": self.confidence,
            "priority": self.priority,
        }


def progressive_implementation(
    assessment: AssessmentRecord,
    weights: WeightTable,
    mode: str = DEFAULT_MODE,
    framework: FrameworkDefinition | None = None,
) -> list[ProgressiveStep]:
    """Order single-level improvements by marginal final-value delta scaled
    by confidence in the current level, so high-confidence high-consequence
    moves come first. This ordering rule is a documented reconstruction, not
    a normative prescription."""
    framework = framework or load_framework()
    candidates = [
        Intervention(criterion_id, level + 1)
        for criterion_id, level in sorted(assessment.ratings.items())
        if level < 5
    ]
    report = what_if(assessment, weights, mode, candidates, framework)
    steps = []
    for marginal in report.marginals:
        confidence = LEVEL_CONFIDENCE.get(
            assessment.provenance.get(marginal.criterion, ""), DEFAULT_LEVEL_CONFIDENCE
        )
        steps.append(
            ProgressiveStep(
                criterion=marginal.criterion,
                from_level=marginal.old_level,
                to_level=marginal.new_level,
                final_value_delta=marginal.final_value_delta,
                confidence=confidence,
                priority=marginal.final_value_delta * confidence,
            )
        )
    steps.sort(key=lambda s: (-s.priority, s.criterion))
    return steps


# -- pathway stage 4: continuous value assessment --------------------------------


@dataclass(frozen=True)
class TrendPoint:
    assessment_id: str
    version: int
    created_at: str
    scores: StageScores

    def to_json_dict(self) -> dict:
        return {
            "assessment_id": self.assessment_id,
            "version": self.version,
            "created_at": self.created_at,
            "scores": self.scores.to_json_dict(),
        }


@dataclass(frozen=True)
class TrendStep:
    from_created_at: str
    to_created_at: str
    capability_delta: float
    adoption_rate_delta: float
    effective_delta: float
    utility_rate_delta: float
    final_value_delta: float

    def to_json_dict(self) -> dict:
        return {
            "from_created_at": self.from_created_at,
            "to_created_at": self.to_created_at,
            "capability_delta": self.capability_delta,
            "adoption_rate_delta": self.adoption_rate_delta,
            "effective_delta": self.effective_delta,
            "utility_rate_delta": self.utility_rate_delta,
            "final_value_delta": self.final_value_delta,
        }


@dataclass(frozen=True)
class TrendReport:
    mode: str
    points: tuple[TrendPoint, ...]
    steps: tuple[TrendStep, ...]
    cumulative_final: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "points": [p.to_json_dict() for p in self.points],
            "steps": [s.to_json_dict() for s in self.steps],
            "cumulative_final": list(self.cumulative_final),
        }


def continuous_value_assessment(
    series: Sequence[AssessmentRecord],
    weights: WeightTable,
    mode: str = DEFAULT_MODE,
    framework: FrameworkDefinition | None = None,
) -> TrendReport:
    """Per-stage first differences and the final-value trajectory over a
    time-ordered assessment series."""
    if len(series) < 2:
        raise ValidationError("trend analysis needs at least 2 assessments")
    framework = framework or load_framework()
    stamps = [a.created_at for a in series]
    if any(not s for s in stamps):
        raise ValidationError("every assessment in the series needs a created_at timestamp")
    if any(b < a for a, b in zip(stamps, stamps[1:])):
        raise ValidationError("assessments must be ordered by non-decreasing created_at")

    points = tuple(
        TrendPoint(
            assessment_id=a.assessment_id,
            version=a.version,
            created_at=a.created_at,
            scores=run_pipeline(a, weights, mode, framework),
        )
        for a in series
    )
    steps = tuple(
        TrendStep(
            from_created_at=p.created_at,
            to_created_at=q.created_at,
            capability_delta=q.scores.capability_score - p.scores.capability_score,
            adoption_rate_delta=q.scores.adoption_rate - p.scores.adoption_rate,
            effective_delta=q.scores.effective_capability - p.scores.effective_capability,
            utility_rate_delta=q.scores.utility_rate - p.scores.utility_rate,
            final_value_delta=q.scores.final_value - p.scores.final_value,
        )
        for p, q in zip(points, points[1:])
    )
    return TrendReport(
        mode=mode,
        points=points,
        steps=steps,
        cumulative_final=tuple(p.scores.final_value for p in points),
    )


# -- pathway report wrapper -------------------------------------------------------

PATHWAY_STAGES = (
    "ValueDensityMapping",
    "CapabilityAdoptionAlignment",
    "ProgressiveImplementation",
    "ContinuousValueAssessment",
)

_PAYLOAD_TYPES = {
    "ValueDensityMapping": list,
    "CapabilityAdoptionAlignment": GapReport,
    "ProgressiveImplementation": list,
    "ContinuousValueAssessment": TrendReport,
}


@dataclass(frozen=True)
class PathwayReport:
    stage: str
    payload: object

    def __post_init__(self):
        if self.stage not in PATHWAY_STAGES:
            raise ValidationError(f"stage must be one of {PATHWAY_STAGES}, got {self.stage!r}")
        expected = _PAYLOAD_TYPES[self.stage]
        if not isinstance(self.payload, expected):
            raise ValidationError(
                f"payload for stage {self.stage} must be {expected.__name__}, "
                f"got {type(self.payload).__name__}"
            )

    def to_json_dict(self) -> dict:
        if isinstance(self.payload, list):
            payload = [item.to_json_dict() for item in self.payload]
        else:
            payload = self.payload.to_json_dict()
        return {"stage": self.stage, "payload": payload}
