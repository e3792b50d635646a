"""Persistence: canonical byte-stable serialization, versioned assessments,
audit logging, and cache-key correctness."""

from __future__ import annotations

import json

import pytest

from temai.delphi import DelphiStudy, ExpertSubmission
from temai.errors import SchemaError, ValidationError
from temai.fixtures import load_assessment, load_weight_table
from temai.pipeline import run_pipeline
from temai.store import Store, StudyDocument


@pytest.fixture()
def store(tmp_path):
    return Store(tmp_path)


def make_study() -> StudyDocument:
    doc = StudyDocument("retail-study", weight_table="store", created_at="2025-03-02T00:00:00Z")
    doc.add_assessment(load_assessment("retail"), at="2025-03-02T00:00:01Z")
    return doc


class TestRoundTrip:
    def test_load_save_identity(self, store):
        doc = make_study()
        store.save(doc)
        assert store.load("retail-study") == doc

    def test_save_twice_identical_bytes(self, store):
        doc = make_study()
        first = store.save(doc).read_bytes()
        second = store.save(doc).read_bytes()
        assert first == second

    def test_canonical_bytes_after_round_trip(self, store):
        doc = make_study()
        path = store.save(doc)
        original = path.read_bytes()
        reloaded = store.load("retail-study")
        assert store.save(reloaded).read_bytes() == original

    def test_unknown_schema_version_rejected(self):
        doc = make_study().to_json_dict()
        doc["temai_schema"] = 99
        with pytest.raises(SchemaError, match="99"):
            StudyDocument.from_json_dict(doc)

    def test_wrong_kind_rejected(self):
        doc = make_study().to_json_dict()
        doc["kind"] = "assessment"
        with pytest.raises(SchemaError):
            StudyDocument.from_json_dict(doc)

    def test_missing_study_raises(self, store):
        with pytest.raises(ValidationError):
            store.load("ghost")


class TestVersioning:
    def test_reposting_creates_new_version(self):
        doc = make_study()
        record = load_assessment("retail")
        stored = doc.add_assessment(record.with_levels({"perception_capability": 5}))
        assert stored.version == 2
        assert doc.latest_assessment("retail-baseline").version == 2
        # the first version is still readable: immutable snapshots
        v1 = doc.assessment_version("retail-baseline", 1)
        assert v1.ratings["perception_capability"] == 4

    def test_missing_version_raises(self):
        doc = make_study()
        with pytest.raises(ValidationError):
            doc.assessment_version("retail-baseline", 7)

    def test_missing_assessment_raises(self):
        doc = make_study()
        with pytest.raises(ValidationError):
            doc.latest_assessment("ghost")


class TestAuditLog:
    def test_mutations_append_audit_entries(self):
        doc = make_study()
        before = len(doc.audit_log)
        doc.add_assessment(load_assessment("pv"), at="2025-03-02T00:00:02Z")
        assert len(doc.audit_log) == before + 1
        entry = doc.audit_log[-1]
        assert entry["action"] == "assessment_saved"
        assert entry["at"] == "2025-03-02T00:00:02Z"

    def test_rounds_are_logged(self):
        doc = make_study()
        study = DelphiStudy("retail-study")
        subs = [
            ExpertSubmission("e1", 1, rankings={"a": 1, "b": 2}),
            ExpertSubmission("e2", 1, rankings={"a": 1, "b": 2}),
        ]
        summary = study.run_round(subs)
        doc.add_round(summary, [s.rankings for s in subs], at="2025-03-02T00:00:03Z")
        assert doc.audit_log[-1]["action"] == "round_recorded"
        assert doc.round_summaries()[0].concordance.w == 1.0


class TestResultsCache:
    def test_cache_key_tracks_content(self):
        doc = make_study()
        record = load_assessment("retail")
        weights = load_weight_table("store")
        scores = run_pipeline(record, weights, "reported")
        doc.cache_result(record, weights, scores)
        assert doc.cached_result(record, weights, "reported") is not None
        # changing a rating changes the key: the stale entry is unreachable
        changed = record.with_levels({"perception_capability": 5})
        assert doc.cached_result(changed, weights, "reported") is None
        # and a different weight table misses too
        assert doc.cached_result(record, load_weight_table("pv"), "reported") is None

    def test_cached_payload_is_display_formatted(self):
        doc = make_study()
        record = load_assessment("retail")
        weights = load_weight_table("store")
        doc.cache_result(record, weights, run_pipeline(record, weights, "reported"))
        payload = doc.cached_result(record, weights, "reported")
        assert payload["capability_score"] == "57.56"
        assert payload["adoption_rate"] == "0.5116"


class TestStoreListing:
    def test_list_studies(self, store):
        store.save(make_study())
        other = StudyDocument("pv-study")
        store.save(other)
        assert store.list_studies() == ["pv-study", "retail-study"]

    def test_study_id_slash_is_sanitized(self, store, tmp_path):
        doc = StudyDocument("weird/id")
        path = store.save(doc)
        assert path.parent == tmp_path
        assert "/" not in path.name
