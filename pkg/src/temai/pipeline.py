"""Staged score chain: capability points, adoption conversion, effective
capability, utility conversion, and final value realization.

Two chain modes are supported and both finals travel with every result:

* ``appendix`` — the strict multiplicative chain:
  ``final = capability × adoption_rate × utility_rate``.
* ``reported`` — the chain that reproduces the bundled case studies'
  headline numbers, in which the adoption rate is applied twice:
  ``final = capability × adoption_rate² × utility_rate``.

The two are related by ``reported = appendix × adoption_rate`` exactly, so
neither is ever hidden by the other. ``reported`` is the default because the
bundled benchmarks are stated in it.

All functions are pure and deterministic; sweeps may run them in parallel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ValidationError
from .fixtures import load_framework
from .framework import AssessmentRecord, FrameworkDefinition, WeightTable, level_to_score

MODES = ("appendix", "reported")
DEFAULT_MODE = "reported"

STAGES = ("capability", "adoption", "utility")

_STAGE_KEYS = ("capability_score", "adoption_rate", "utility_rate")
_STAGE_OF_KEY = {
    "capability_score": "capability",
    "adoption_rate": "adoption",
    "utility_rate": "utility",
}


@dataclass(frozen=True)
class StageScores:
    """All staged outputs of one pipeline run.

    ``final_value`` follows ``mode``; both chain finals are always carried.
    """

    capability_score: float
    adoption_rate: float
    effective_capability: float
    utility_rate: float
    final_value: float
    mode: str
    final_value_appendix: float
    final_value_reported: float

    def to_json_dict(self) -> dict:
        return {
            "capability_score": self.capability_score,
            "adoption_rate": self.adoption_rate,
            "effective_capability": self.effective_capability,
            "utility_rate": self.utility_rate,
            "final_value": self.final_value,
            "mode": self.mode,
            "final_value_appendix": self.final_value_appendix,
            "final_value_reported": self.final_value_reported,
        }

    def display_dict(self) -> dict:
        """Presentation rounding: 2 decimals for scores, 4 for rates."""
        return {
            "capability_score": f"{self.capability_score:.2f}",
            "adoption_rate": f"{self.adoption_rate:.4f}",
            "effective_capability": f"{self.effective_capability:.2f}",
            "utility_rate": f"{self.utility_rate:.4f}",
            "final_value": f"{self.final_value:.2f}",
            "mode": self.mode,
            "final_value_appendix": f"{self.final_value_appendix:.2f}",
            "final_value_reported": f"{self.final_value_reported:.2f}",
        }


@dataclass(frozen=True)
class ConvertedCriterionScore:
    criterion: str
    stage: str
    raw_level_score: int
    converted: float

    def to_json_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "stage": self.stage,
            "raw_level_score": self.raw_level_score,
            "converted": self.converted,
        }


def _ratings_of(assessment: AssessmentRecord | Mapping[str, int]) -> Mapping[str, int]:
    if isinstance(assessment, AssessmentRecord):
        return assessment.ratings
    return assessment


def _stage_weighted_sum(
    ratings: Mapping[str, int],
    weights: WeightTable,
    framework: FrameworkDefinition,
    dimension: str,
) -> float:
    """Σ level_score × weight / 10000 over the dimension's criteria."""
    total = 0.0
    for crit in framework.criteria_of_dimension(dimension):
        if crit.id not in ratings:
            raise ValidationError(
                f"missing rating for {dimension} criterion '{crit.id}'"
            )
        total += level_to_score(ratings[crit.id], criterion=crit.id) * weights.weight(crit.id)
    return total / 10000.0


def capability_score(
    assessment: AssessmentRecord | Mapping[str, int],
    weights: WeightTable,
    framework: FrameworkDefinition | None = None,
) -> float:
    """Weighted capability points in 0..100 (for a 10000-permyriad column)."""
    framework = framework or load_framework()
    return _stage_weighted_sum(_ratings_of(assessment), weights, framework, "capability")


def adoption_rate(
    assessment: AssessmentRecord | Mapping[str, int],
    weights: WeightTable,
    framework: FrameworkDefinition | None = None,
) -> float:
    """Weighted mean adoption score as a fraction of 1.

    The ceiling is below 1 when the table's adoption column sums under
    10000 permyriad (the bundled store table: 9150.00).
    """
    framework = framework or load_framework()
    return _stage_weighted_sum(_ratings_of(assessment), weights, framework, "adoption") / 100.0


def utility_rate(
    assessment: AssessmentRecord | Mapping[str, int],
    weights: WeightTable,
    framework: FrameworkDefinition | None = None,
) -> float:
    """Weighted mean utility score as a fraction of 1."""
    framework = framework or load_framework()
    return _stage_weighted_sum(_ratings_of(assessment), weights, framework, "utility") / 100.0


def run_pipeline(
    assessment: AssessmentRecord | Mapping[str, int],
    weights: WeightTable,
    mode: str = DEFAULT_MODE,
    framework: FrameworkDefinition | None = None,
) -> StageScores:
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    framework = framework or load_framework()
    cap = capability_score(assessment, weights, framework)
    rate_a = adoption_rate(assessment, weights, framework)
    rate_u = utility_rate(assessment, weights, framework)
    effective = cap * rate_a
    final_appendix = effective * rate_u
    final_reported = final_appendix * rate_a
    return StageScores(
        capability_score=cap,
        adoption_rate=rate_a,
        effective_capability=effective,
        utility_rate=rate_u,
        final_value=final_reported if mode == "reported" else final_appendix,
        mode=mode,
        final_value_appendix=final_appendix,
        final_value_reported=final_reported,
    )


def converted_scores(
    assessment: AssessmentRecord | Mapping[str, int],
    weights: WeightTable,
    stage: str,
    mode: str = DEFAULT_MODE,
    framework: FrameworkDefinition | None = None,
) -> list[ConvertedCriterionScore]:
    """Per-criterion converted displays for one stage.

    capability: level score × weight fraction (the criterion's contribution
    to the capability total); adoption: level score scaled by capability/100;
    utility: level score scaled by the value retained entering the utility
    stage (capability × rate² / 100 in reported mode, effective/100 in
    appendix mode).
    """
    if stage not in STAGES:
        raise ValidationError(f"stage must be one of {STAGES}, got {stage!r}")
    framework = framework or load_framework()
    ratings = _ratings_of(assessment)
    scores = run_pipeline(ratings, weights, mode, framework)

    out: list[ConvertedCriterionScore] = []
    for crit in framework.criteria_of_dimension(stage):
        raw = level_to_score(ratings[crit.id], criterion=crit.id)
        if stage == "capability":
            converted = raw * weights.weight(crit.id) / 10000.0
        elif stage == "adoption":
            converted = raw * scores.capability_score / 100.0
        elif mode == "reported":
            converted = raw * scores.capability_score * scores.adoption_rate**2 / 100.0
        else:
            converted = raw * scores.effective_capability / 100.0
        out.append(ConvertedCriterionScore(crit.id, stage, raw, converted))
    return out


# -- level fitting against stage targets --------------------------------------


@dataclass(frozen=True)
class FittedCandidate:
    levels: Mapping[str, int]
    residual: float  # max per-target deviation, display units (points / pp)
    stage_values: Mapping[str, float]


@dataclass(frozen=True)
class FitResult:
    candidates: tuple[FittedCandidate, ...]
    nearest: FittedCandidate | None  # best assignment even when out of tolerance
    searched: int
    tolerance: float

    @property
    def unique(self) -> bool:
        return len(self.candidates) == 1


def fit_levels_to_targets(
    known_levels: Mapping[str, int],
    targets: Mapping[str, float],
    weights: WeightTable,
    framework: FrameworkDefinition | None = None,
    tolerance: float = 0.05,
    max_unknowns: int = 8,
) -> FitResult:
    """Exhaustively enumerate unknown levels so stage values hit targets.

    ``targets`` keys are stage names ("capability_score" in points,
    "adoption_rate"/"utility_rate" as fractions). Unknowns are the targeted
    dimensions' criteria absent from ``known_levels``. ``tolerance`` is in
    display units: points for capability, percentage points for rates.

    Returns every assignment within tolerance, ranked by residual (ties
    broken by the level tuple in framework order, so the ordering is
    deterministic); ``nearest`` reports the best assignment even when the
    candidate list is empty.
    """
    framework = framework or load_framework()
    unknown_by_key: dict[str, list[str]] = {}
    for key in targets:
        if key not in _STAGE_KEYS:
            raise ValidationError(f"unknown fit target {key!r}; expected one of {_STAGE_KEYS}")
        dim = _STAGE_OF_KEY[key]
        unknown_by_key[key] = [
            c.id for c in framework.criteria_of_dimension(dim) if c.id not in known_levels
        ]
    for criterion_id, level in known_levels.items():
        level_to_score(level, criterion=criterion_id)

    # each stage is fitted by its own exhaustive 5^k enumeration, so the
    # feasibility bound applies per targeted stage
    for key, unknowns in unknown_by_key.items():
        if len(unknowns) > max_unknowns:
            raise ValidationError(
                f"{len(unknowns)} unknown {_STAGE_OF_KEY[key]} criteria exceed "
                f"the exhaustive-search limit of {max_unknowns}"
            )

    # stages are independent, so fit each targeted stage separately and
    # combine: identical result to one joint 5^k enumeration, much cheaper
    per_key: dict[str, list[tuple[float, tuple[int, ...], float]]] = {}
    searched = 1
    for key, unknowns in unknown_by_key.items():
        dim = _STAGE_OF_KEY[key]
        display_scale = 1.0 if key == "capability_score" else 100.0
        target = float(targets[key])
        results: list[tuple[float, tuple[int, ...], float]] = []
        for combo in itertools.product(range(1, 6), repeat=len(unknowns)):
            levels = dict(known_levels)
            levels.update(zip(unknowns, combo))
            raw = _stage_weighted_sum(levels, weights, framework, dim)
            value = raw if key == "capability_score" else raw / 100.0
            deviation = abs(value - target) * display_scale
            results.append((deviation, combo, value))
        searched *= max(len(results), 1)
        results.sort(key=lambda item: (item[0], item[1]))
        per_key[key] = results

    keys = list(per_key)

    def combine(picks) -> FittedCandidate:
        levels = dict(known_levels)
        stage_values: dict[str, float] = {}
        for key, (_, combo, value) in zip(keys, picks):
            levels.update(zip(unknown_by_key[key], combo))
            stage_values[key] = value
        return FittedCandidate(
            levels=levels,
            residual=max(p[0] for p in picks),
            stage_values=stage_values,
        )

    # residual = max over stages, so a combination is within tolerance iff
    # every stage pick is, and the per-stage minima combine to the global best
    survivors = [[r for r in per_key[k] if r[0] <= tolerance] for k in keys]
    candidates = [combine(picks) for picks in itertools.product(*survivors)]
    nearest = combine([per_key[k][0] for k in keys]) if all(per_key.values()) else None

    candidates.sort(
        key=lambda c: (
            c.residual,
            tuple(c.levels[u] for key in keys for u in unknown_by_key[key]),
        )
    )
    return FitResult(
        candidates=tuple(candidates),
        nearest=nearest,
        searched=searched,
        tolerance=tolerance,
    )
