"""Study persistence: versioned assessments, Delphi rounds, a pipeline
results cache, and an append-only audit log, serialized canonically so the
same document always produces byte-identical files.

Concurrency: the engine itself is stateless; Store serializes writers per
study id and allows any number of concurrent readers.
"""

from __future__ import annotations

import hashlib
import json
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from .delphi import RoundSummary
from .errors import SchemaError, ValidationError
from .framework import SCHEMA_VERSION, AssessmentRecord, WeightTable, dumps_canonical
from .pipeline import StageScores


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def content_fingerprint(*parts: Mapping) -> str:
    """Stable digest of document content; cache keys derived from it can
    never serve stale results because any rating or weight change changes
    the key itself."""
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


class StudyDocument:
    """One study: assessments (immutable versioned snapshots), Delphi round
    summaries with their submissions, cached pipeline results, and the audit
    log (append-only)."""

    def __init__(
        self,
        study_id: str,
        framework_id: str = "temai",
        weight_table: str = "",
        created_at: str = "",
    ):
        self.study_id = study_id
        self.framework_id = framework_id
        self.weight_table = weight_table
        self.created_at = created_at or _now_iso()
        self.assessments: dict[str, list[AssessmentRecord]] = {}
        self.rounds: list[dict] = []
        self.results_cache: dict[str, dict] = {}
        self.audit_log: list[dict] = []

    # -- audit -----------------------------------------------------------

    def log(self, action: str, detail: str, at: str | None = None) -> None:
        self.audit_log.append({"at": at or _now_iso(), "action": action, "detail": detail})

    # -- assessments -------------------------------------------------------

    def add_assessment(self, record: AssessmentRecord, at: str | None = None) -> AssessmentRecord:
        """Store a new immutable version; re-posting an existing id creates
        the next version rather than editing in place."""
        versions = self.assessments.setdefault(record.assessment_id, [])
        stamped = AssessmentRecord.from_json_dict(
            {**record.to_json_dict(), "version": len(versions) + 1}
        )
        versions.append(stamped)
        self.log(
            "assessment_saved",
            f"{record.assessment_id} v{stamped.version}",
            at=at,
        )
        return stamped

    def latest_assessment(self, assessment_id: str) -> AssessmentRecord:
        versions = self.assessments.get(assessment_id)
        if not versions:
            raise ValidationError(f"no assessment '{assessment_id}' in study '{self.study_id}'")
        return versions[-1]

    def assessment_version(self, assessment_id: str, version: int) -> AssessmentRecord:
        versions = self.assessments.get(assessment_id, [])
        for record in versions:
            if record.version == version:
                return record
        raise ValidationError(
            f"assessment '{assessment_id}' has no version {version} in study '{self.study_id}'"
        )

    # -- rounds ------------------------------------------------------------

    def add_round(self, summary: RoundSummary, submissions: list[dict], at: str | None = None) -> None:
        self.rounds.append(
            {"summary": summary.to_json_dict(), "submissions": submissions}
        )
        self.log("round_recorded", f"round {summary.round}", at=at)

    def round_summaries(self) -> list[RoundSummary]:
        return [RoundSummary.from_json_dict(r["summary"]) for r in self.rounds]

    # -- results cache -------------------------------------------------------

    def cache_result(
        self, record: AssessmentRecord, weights: WeightTable, scores: StageScores
    ) -> str:
        key = content_fingerprint(
            {"ratings": dict(record.ratings)},
            {"weights": weights.to_json_dict()["entries"]},
            {"mode": scores.mode},
        )
        self.results_cache[key] = scores.display_dict()
        return key

    def cached_result(
        self, record: AssessmentRecord, weights: WeightTable, mode: str
    ) -> dict | None:
        key = content_fingerprint(
            {"ratings": dict(record.ratings)},
            {"weights": weights.to_json_dict()["entries"]},
            {"mode": mode},
        )
        return self.results_cache.get(key)

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "temai_schema": SCHEMA_VERSION,
            "kind": "study",
            "study_id": self.study_id,
            "framework_id": self.framework_id,
            "weight_table": self.weight_table,
            "created_at": self.created_at,
            "assessments": {
                assessment_id: [record.to_json_dict() for record in versions]
                for assessment_id, versions in sorted(self.assessments.items())
            },
            "rounds": self.rounds,
            "results_cache": dict(sorted(self.results_cache.items())),
            "audit_log": self.audit_log,
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "StudyDocument":
        version = doc.get("temai_schema")
        if version != SCHEMA_VERSION:
            raise SchemaError(
                f"unsupported temai_schema version {version!r} "
                f"(this build reads version {SCHEMA_VERSION})"
            )
        if doc.get("kind") != "study":
            raise SchemaError(f"expected document kind 'study', got {doc.get('kind')!r}")
        study = cls(
            study_id=doc["study_id"],
            framework_id=doc.get("framework_id", "temai"),
            weight_table=doc.get("weight_table", ""),
            created_at=doc.get("created_at", ""),
        )
        for assessment_id, versions in doc.get("assessments", {}).items():
            study.assessments[assessment_id] = [
                AssessmentRecord.from_json_dict(v) for v in versions
            ]
        study.rounds = list(doc.get("rounds", []))
        study.results_cache = dict(doc.get("results_cache", {}))
        study.audit_log = list(doc.get("audit_log", []))
        return study

    def __eq__(self, other) -> bool:
        return isinstance(other, StudyDocument) and self.to_json_dict() == other.to_json_dict()


class Store:
    """File-backed study storage with canonical bytes and per-study write
    locks."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock_for(self, study_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(study_id, threading.Lock())

    def path_for(self, study_id: str) -> Path:
        safe = study_id.replace("/", "_")
        return self.data_dir / f"study_{safe}.json"

    def save(self, document: StudyDocument) -> Path:
        payload = dumps_canonical(document.to_json_dict())
        path = self.path_for(document.study_id)
        with self._lock_for(document.study_id):
            path.write_text(payload, encoding="utf-8")
        return path

    def load(self, study_id: str) -> StudyDocument:
        path = self.path_for(study_id)
        if not path.exists():
            raise ValidationError(f"no stored study '{study_id}'")
        return StudyDocument.from_json_dict(json.loads(path.read_text(encoding="utf-8")))

    def exists(self, study_id: str) -> bool:
        return self.path_for(study_id).exists()

    def list_studies(self) -> list[str]:
        return sorted(
            p.stem.removeprefix("study_") for p in self.data_dir.glob("study_*.json")
        )
