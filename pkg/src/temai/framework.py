"""TEMAI hierarchy model: dimensions, components, criteria, weight tables,
level ratings, and assessment documents.

The hierarchy has three levels: 3 dimensions (capability, adoption, utility),
8 components, and 25 criteria (8 capability, 9 adoption, 8 utility). Weights
are expressed in permyriad (1/10000); a dimension column nominally sums to
10000, but the bundled store table's adoption column sums to 9150.00 and is
deliberately kept that way in raw mode so the bundled case studies reproduce
exactly. Use WeightTable.normalized() to rescale each dimension to 10000.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import difflib
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import AliasLookupError, SchemaError, ValidationError

SCHEMA_VERSION = 1

DIMENSION_IDS = ("capability", "adoption", "utility")

#: Structural expectations for a valid definition. The adoption dimension
#: carries 9 criteria because the value-optimization component contributes a
#: single criterion of its own.
EXPECTED_COMPONENT_COUNT = 8
EXPECTED_CRITERIA_PER_DIMENSION = {"capability": 8, "adoption": 9, "utility": 8}
EXPECTED_CRITERION_COUNT = sum(EXPECTED_CRITERIA_PER_DIMENSION.values())

#: Dimension permyriad sums within this distance of 10000 rate a "pass";
#: anything further is surfaced as a warning, never silently rescaled.
WEIGHT_SUM_TOLERANCE = 0.05

LEVEL_MIN, LEVEL_MAX = 1, 5

PROVENANCE_VALUES = ("paper_stated", "oracle_fitted", "user_entered")


def level_to_score(level: int, criterion: str | None = None) -> int:
    """Map an ordinal level 1..5 to its point score 20..100 (20 per level)."""
    if not isinstance(level, int) or isinstance(level, bool):
        raise ValidationError(_level_msg(level, criterion))
    if not LEVEL_MIN <= level <= LEVEL_MAX:
        raise ValidationError(_level_msg(level, criterion))
    return 20 * level


def _level_msg(level: object, criterion: str | None) -> str:
    where = f" for criterion '{criterion}'" if criterion else ""
    return f"level must be an integer in {LEVEL_MIN}..{LEVEL_MAX}{where}, got {level!r}"


@dataclass(frozen=True)
class Dimension:
    id: str
    display_name: str


@dataclass(frozen=True)
class Component:
    id: str
    dimension: str
    display_name: str


@dataclass(frozen=True)
class Criterion:
    """One leaf of the hierarchy.

    ``aliases`` maps a weight-table id to the display-name variant that
    table uses for this criterion, so documents written against either
    naming convention resolve to the same canonical id.
    """

    id: str
    component: str
    display_name: str
    aliases: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class LevelRating:
    criterion: str
    level: int

    def __post_init__(self):
        level_to_score(self.level, criterion=self.criterion)

    @property
    def score(self) -> int:
        return 20 * self.level


class FrameworkDefinition:
    """Validated, immutable view of the three-level hierarchy."""

    def __init__(
        self,
        framework_id: str,
        dimensions: Iterable[Dimension],
        components: Iterable[Component],
        criteria: Iterable[Criterion],
        display_name: str = "",
    ):
        self.framework_id = framework_id
        self.display_name = display_name
        self.dimensions = tuple(dimensions)
        self.components = tuple(components)
        self.criteria = tuple(criteria)
        self._component_by_id = {c.id: c for c in self.components}
        self._criterion_by_id = {c.id: c for c in self.criteria}
        self._alias_registry: dict[str, dict[str, str]] = {}

    # -- lookups ---------------------------------------------------------

    def criterion(self, criterion_id: str) -> Criterion:
        try:
            return self._criterion_by_id[criterion_id]
        except KeyError:
            raise ValidationError(f"unknown criterion id '{criterion_id}'") from None

    def component(self, component_id: str) -> Component:
        try:
            return self._component_by_id[component_id]
        except KeyError:
            raise ValidationError(f"unknown component id '{component_id}'") from None

    def dimension_of(self, criterion_id: str) -> str:
        crit = self.criterion(criterion_id)
        comp = self._component_by_id.get(crit.component)
        if comp is None:
            raise ValidationError(
                f"criterion '{criterion_id}' references unknown component '{crit.component}'"
            )
        return comp.dimension

    def criteria_of_dimension(self, dimension_id: str) -> tuple[Criterion, ...]:
        return tuple(
            c
            for c in self.criteria
            if c.component in self._component_by_id
            and self._component_by_id[c.component].dimension == dimension_id
        )

    def criteria_of_component(self, component_id: str) -> tuple[Criterion, ...]:
        return tuple(c for c in self.criteria if c.component == component_id)

    def criterion_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.criteria)

    # -- alias resolution --------------------------------------------------

    def resolve_alias(self, name: str, table_id: str) -> str:
        """Resolve a table-specific display name (or canonical id/display
        name) to the canonical criterion id.

        Unknown names raise AliasLookupError listing the nearest candidates.
        """
        registry = self._registry_for(table_id)
        key = _normalize_name(name)
        if key in registry:
            return registry[key]
        candidates = difflib.get_close_matches(key, registry.keys(), n=3, cutoff=0.5)
        shown = sorted({registry[c] for c in candidates})
        raise AliasLookupError(
            f"unknown criterion name {name!r} for table '{table_id}'"
            + (f"; nearest candidates: {', '.join(shown)}" if shown else ""),
            candidates=shown,
        )

    def _registry_for(self, table_id: str) -> dict[str, str]:
        if table_id not in self._alias_registry:
            registry: dict[str, str] = {}
            for crit in self.criteria:
                registry[_normalize_name(crit.id)] = crit.id
                registry[_normalize_name(crit.display_name)] = crit.id
                table_name = crit.aliases.get(table_id)
                if table_name:
                    registry[_normalize_name(table_name)] = crit.id
            self._alias_registry[table_id] = registry
        return self._alias_registry[table_id]

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "temai_schema": SCHEMA_VERSION,
            "kind": "framework",
            "framework_id": self.framework_id,
            "display_name": self.display_name,
            "dimensions": [{"id": d.id, "display_name": d.display_name} for d in self.dimensions],
            "components": [
                {"id": c.id, "dimension": c.dimension, "display_name": c.display_name}
                for c in self.components
            ],
            "criteria": [
                {
                    "id": c.id,
                    "component": c.component,
                    "display_name": c.display_name,
                    "aliases": dict(c.aliases),
                }
                for c in self.criteria
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "FrameworkDefinition":
        _check_schema(doc, "framework")
        return cls(
            framework_id=doc["framework_id"],
            display_name=doc.get("display_name", ""),
            dimensions=[Dimension(d["id"], d["display_name"]) for d in doc["dimensions"]],
            components=[
                Component(c["id"], c["dimension"], c["display_name"]) for c in doc["components"]
            ],
            criteria=[
                Criterion(
                    c["id"],
                    c["component"],
                    c["display_name"],
                    dict(c.get("aliases", {})),
                )
                for c in doc["criteria"]
            ],
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FrameworkDefinition) and self.to_json_dict() == other.to_json_dict()
        )

    def __repr__(self) -> str:
        return (
            f"FrameworkDefinition({self.framework_id!r}, {len(self.dimensions)} dimensions, "
            f"{len(self.components)} components, {len(self.criteria)} criteria)"
        )


_WS_RE = re.compile(r"\s+")


def _normalize_name(name: str) -> str:
    # tolerate the tables' inconsistent "A - B" vs "A-B" hyphenation and
    # underscores in canonical ids
    s = name.strip().casefold().replace("_", " ")
    s = re.sub(r"\s*-\s*", "-", s)
    return _WS_RE.sub(" ", s)


class WeightTable:
    """Criterion weights in permyriad for one sector.

    Entries keep full 2-decimal published precision; serialization renders
    them as fixed-point strings so round-trips are byte-stable.
    """

    def __init__(self, table_id: str, entries: Mapping[str, float], sector: str = ""):
        self.table_id = table_id
        self.sector = sector
        clean: dict[str, float] = {}
        for criterion_id, value in entries.items():
            w = float(value)
            if not w > 0:
                raise ValidationError(
                    f"weight for '{criterion_id}' must be strictly positive, got {value}"
                )
            clean[criterion_id] = w
        self.entries: Mapping[str, float] = dict(clean)

    def weight(self, criterion_id: str) -> float:
        try:
            return self.entries[criterion_id]
        except KeyError:
            raise ValidationError(
                f"weight table '{self.table_id}' has no entry for criterion '{criterion_id}'"
            ) from None

    def dimension_sum(self, framework: FrameworkDefinition, dimension_id: str) -> float:
        return sum(
            self.entries[c.id]
            for c in framework.criteria_of_dimension(dimension_id)
            if c.id in self.entries
        )

    def normalized(self, framework: FrameworkDefinition) -> "WeightTable":
        """Rescale each dimension's weights to sum to exactly 10000."""
        entries: dict[str, float] = {}
        for dim in framework.dimensions:
            total = self.dimension_sum(framework, dim.id)
            if total <= 0:
                raise ValidationError(f"dimension '{dim.id}' has no positive weight mass")
            for crit in framework.criteria_of_dimension(dim.id):
                if crit.id in self.entries:
                    entries[crit.id] = self.entries[crit.id] * 10000.0 / total
        leftovers = set(self.entries) - set(entries)
        if leftovers:
            raise ValidationError(
                f"weight table '{self.table_id}' has entries outside the framework: "
                + ", ".join(sorted(leftovers))
            )
        return WeightTable(self.table_id + "_normalized", entries, sector=self.sector)

    def to_json_dict(self) -> dict:
        return {
            "temai_schema": SCHEMA_VERSION,
            "kind": "weight_table",
            "table_id": self.table_id,
            "sector": self.sector,
            "unit": "permyriad",
            "entries": {k: f"{v:.2f}" for k, v in self.entries.items()},
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "WeightTable":
        _check_schema(doc, "weight_table")
        return cls(
            table_id=doc["table_id"],
            entries={k: float(v) for k, v in doc["entries"].items()},
            sector=doc.get("sector", ""),
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightTable) and self.to_json_dict() == other.to_json_dict()

    def __repr__(self) -> str:
        return f"WeightTable({self.table_id!r}, {len(self.entries)} entries)"


class AssessmentRecord:
    """One evaluation instance: a complete set of per-criterion levels.

    ``provenance`` records where each level came from: stated in the source
    case study ("paper_stated"), recovered by the target-fitting oracle
    ("oracle_fitted"), or entered by a user ("user_entered").
    """

    def __init__(
        self,
        assessment_id: str,
        framework_id: str,
        weight_table: str,
        ratings: Mapping[str, int],
        provenance: Mapping[str, str] | None = None,
        created_at: str = "",
        version: int = 1,
        fit_residuals: Mapping[str, float] | None = None,
    ):
        self.assessment_id = assessment_id
        self.framework_id = framework_id
        self.weight_table = weight_table
        self.created_at = created_at
        self.version = int(version)
        rated: dict[str, int] = {}
        for criterion_id, level in ratings.items():
            level_to_score(level, criterion=criterion_id)
            if criterion_id in rated:
                raise ValidationError(f"duplicate rating for criterion '{criterion_id}'")
            rated[criterion_id] = int(level)
        self.ratings: Mapping[str, int] = dict(rated)
        prov = dict(provenance or {})
        for criterion_id, source in prov.items():
            if source not in PROVENANCE_VALUES:
                raise ValidationError(
                    f"provenance for '{criterion_id}' must be one of {PROVENANCE_VALUES}, got {source!r}"
                )
        self.provenance: Mapping[str, str] = prov
        self.fit_residuals: Mapping[str, float] = dict(fit_residuals or {})

    @property
    def level_ratings(self) -> tuple[LevelRating, ...]:
        return tuple(LevelRating(c, lv) for c, lv in self.ratings.items())

    def level(self, criterion_id: str) -> int:
        try:
            return self.ratings[criterion_id]
        except KeyError:
            raise ValidationError(
                f"assessment '{self.assessment_id}' has no rating for criterion '{criterion_id}'"
            ) from None

    def validate_against(self, framework: FrameworkDefinition) -> None:
        """Ratings must cover every framework criterion exactly once."""
        expected = set(framework.criterion_ids())
        got = set(self.ratings)
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        if missing:
            raise ValidationError(
                f"assessment '{self.assessment_id}' is missing ratings for: " + ", ".join(missing)
            )
        if extra:
            raise ValidationError(
                f"assessment '{self.assessment_id}' rates unknown criteria: " + ", ".join(extra)
            )

    def with_levels(self, updates: Mapping[str, int], version: int | None = None) -> "AssessmentRecord":
        """Copy with some levels replaced; provenance for replaced levels
        becomes user_entered."""
        ratings = dict(self.ratings)
        provenance = dict(self.provenance)
        for criterion_id, level in updates.items():
            if criterion_id not in ratings:
                raise ValidationError(f"unknown criterion '{criterion_id}'")
            ratings[criterion_id] = level
            provenance[criterion_id] = "user_entered"
        return AssessmentRecord(
            assessment_id=self.assessment_id,
            framework_id=self.framework_id,
            weight_table=self.weight_table,
            ratings=ratings,
            provenance=provenance,
            created_at=self.created_at,
            version=self.version if version is None else version,
            fit_residuals=self.fit_residuals,
        )

    def to_json_dict(self) -> dict:
        doc = {
            "temai_schema": SCHEMA_VERSION,
            "kind": "assessment",
            "assessment_id": self.assessment_id,
            "framework_id": self.framework_id,
            "weight_table": self.weight_table,
            "created_at": self.created_at,
            "version": self.version,
            "ratings": dict(sorted(self.ratings.items())),
            "provenance": dict(sorted(self.provenance.items())),
        }
        if self.fit_residuals:
            doc["fit_residuals"] = {k: round(v, 6) for k, v in sorted(self.fit_residuals.items())}
        return doc

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "AssessmentRecord":
        _check_schema(doc, "assessment")
        return cls(
            assessment_id=doc["assessment_id"],
            framework_id=doc["framework_id"],
            weight_table=doc["weight_table"],
            ratings={k: int(v) for k, v in doc["ratings"].items()},
            provenance=doc.get("provenance"),
            created_at=doc.get("created_at", ""),
            version=doc.get("version", 1),
            fit_residuals={k: float(v) for k, v in doc.get("fit_residuals", {}).items()},
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, AssessmentRecord) and self.to_json_dict() == other.to_json_dict()

    def __repr__(self) -> str:
        return f"AssessmentRecord({self.assessment_id!r}, v{self.version}, {len(self.ratings)} ratings)"


# -- structural validation ---------------------------------------------------


@dataclass(frozen=True)
class DimensionWeightAudit:
    dimension: str
    total: float
    status: str  # "pass" | "warn"

    @property
    def deviation(self) -> float:
        return self.total - 10000.0


@dataclass(frozen=True)
class ValidationReport:
    framework_id: str
    violations: tuple[str, ...]
    warnings: tuple[str, ...]
    weight_audits: tuple[DimensionWeightAudit, ...]

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "framework_id": self.framework_id,
            "valid": self.is_valid,
            "violations": list(self.violations),
            "warnings": list(self.warnings),
            "weight_sums": {
                a.dimension: {"total": round(a.total, 2), "status": a.status}
                for a in self.weight_audits
            },
        }


def validate_framework(
    framework: FrameworkDefinition, weights: WeightTable | None = None
) -> ValidationReport:
    """Structural audit: counts, orphans, duplicates, and (when a weight
    table is supplied) per-dimension permyriad sums with pass/warn status.

    Report-style: never raises on a bad definition.
    """
    violations: list[str] = []
    warnings: list[str] = []

    dim_ids = [d.id for d in framework.dimensions]
    if sorted(dim_ids) != sorted(DIMENSION_IDS):
        violations.append(
            f"dimension set must be exactly {set(DIMENSION_IDS)}, got {set(dim_ids) or '{}'}"
        )
    if len(dim_ids) != len(set(dim_ids)):
        violations.append("duplicate dimension ids")

    comp_ids = [c.id for c in framework.components]
    if len(comp_ids) != len(set(comp_ids)):
        violations.append("duplicate component ids")
    if len(comp_ids) != EXPECTED_COMPONENT_COUNT:
        violations.append(f"component count {len(comp_ids)} ≠ {EXPECTED_COMPONENT_COUNT}")
    known_dims = set(dim_ids)
    for comp in framework.components:
        if comp.dimension not in known_dims:
            violations.append(
                f"component '{comp.id}' belongs to unknown dimension '{comp.dimension}'"
            )

    crit_ids = [c.id for c in framework.criteria]
    if len(crit_ids) != len(set(crit_ids)):
        violations.append("duplicate criterion ids")
    if len(crit_ids) != EXPECTED_CRITERION_COUNT:
        violations.append(f"criterion count {len(crit_ids)} ≠ {EXPECTED_CRITERION_COUNT}")
    known_comps = {c.id for c in framework.components}
    for crit in framework.criteria:
        if crit.component not in known_comps:
            violations.append(f"criterion '{crit.id}' is orphaned: unknown component '{crit.component}'")

    for dim_id, expected in EXPECTED_CRITERIA_PER_DIMENSION.items():
        if dim_id in known_dims:
            count = len(framework.criteria_of_dimension(dim_id))
            if count != expected:
                violations.append(f"dimension '{dim_id}' has {count} criteria, expected {expected}")

    audits: list[DimensionWeightAudit] = []
    if weights is not None:
        covered = set(weights.entries)
        expected_ids = set(crit_ids)
        missing = sorted(expected_ids - covered)
        extra = sorted(covered - expected_ids)
        if missing:
            violations.append(
                f"weight table '{weights.table_id}' missing entries for: " + ", ".join(missing)
            )
        if extra:
            violations.append(
                f"weight table '{weights.table_id}' has entries for unknown criteria: "
                + ", ".join(extra)
            )
        for dim_id in DIMENSION_IDS:
            if dim_id not in known_dims:
                continue
            total = weights.dimension_sum(framework, dim_id)
            status = "pass" if abs(total - 10000.0) <= WEIGHT_SUM_TOLERANCE else "warn"
            if status == "warn":
                warnings.append(
                    f"dimension '{dim_id}' weights sum to {total:.2f} permyriad (expected 10000.00)"
                )
            audits.append(DimensionWeightAudit(dim_id, total, status))

    return ValidationReport(
        framework_id=framework.framework_id,
        violations=tuple(violations),
        warnings=tuple(warnings),
        weight_audits=tuple(audits),
    )


def resolve_alias(name: str, table_id: str, framework: FrameworkDefinition) -> str:
    """Module-level convenience for FrameworkDefinition.resolve_alias."""
    return framework.resolve_alias(name, table_id)


# -- canonical JSON ------------------------------------------------------------


def dumps_canonical(doc: Mapping) -> str:
    """Canonical serialization: sorted keys, 2-space indent, trailing newline.

    Saving the same document twice yields identical bytes.
    """
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _check_schema(doc: Mapping, kind: str) -> None:
    version = doc.get("temai_schema")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported temai_schema version {version!r} (this build reads version {SCHEMA_VERSION})"
        )
    if doc.get("kind") != kind:
        raise SchemaError(f"expected document kind '{kind}', got {doc.get('kind')!r}")
