"""Decision-support engine for translational evaluation of multimodal AI
inspection systems: AHP weight derivation, Delphi consensus gating, the
staged capability/adoption/utility score chain, value quantification, and
what-if analytics."""

from .framework import (
    AssessmentRecord,
    Criterion,
    Component,
    Dimension,
    FrameworkDefinition,
    LevelRating,
    WeightTable,
    level_to_score,
    resolve_alias,
    validate_framework,
)
from .pipeline import (
    StageScores,
    adoption_rate,
    capability_score,
    converted_scores,
    fit_levels_to_targets,
    run_pipeline,
    utility_rate,
)

__version__ = "0.1.0"

__all__ = [
    "AssessmentRecord",
    "Criterion",
    "Component",
    "Dimension",
    "FrameworkDefinition",
    "LevelRating",
    "StageScores",
    "WeightTable",
    "adoption_rate",
    "capability_score",
    "converted_scores",
    "fit_levels_to_targets",
    "level_to_score",
    "resolve_alias",
    "run_pipeline",
    "utility_rate",
    "validate_framework",
]
