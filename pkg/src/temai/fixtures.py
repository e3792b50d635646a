"""Loaders for the bundled framework, weight tables, and case-study
assessments (retail store inspection and photovoltaic system inspection)."""

from __future__ import annotations

import json
from importlib import resources

from .errors import ValidationError
from .framework import AssessmentRecord, FrameworkDefinition, WeightTable

WEIGHT_TABLE_IDS = ("store", "pv")
ASSESSMENT_IDS = ("retail", "pv")

_FILES = {
    "framework": "framework.json",
    "weights_store": "weights_store.json",
    "weights_pv": "weights_pv.json",
    "assessment_retail": "assessment_retail.json",
    "assessment_pv": "assessment_pv.json",
}


def _read(name: str) -> dict:
    payload = resources.files("temai.data").joinpath(_FILES[name]).read_text(encoding="utf-8")
    return json.loads(payload)


def load_framework() -> FrameworkDefinition:
    return FrameworkDefinition.from_json_dict(_read("framework"))


def load_weight_table(table_id: str) -> WeightTable:
    if table_id not in WEIGHT_TABLE_IDS:
        raise ValidationError(
            f"unknown bundled weight table '{table_id}'; available: {', '.join(WEIGHT_TABLE_IDS)}"
        )
    return WeightTable.from_json_dict(_read(f"weights_{table_id}"))


def load_assessment(case: str) -> AssessmentRecord:
    if case not in ASSESSMENT_IDS:
        raise ValidationError(
            f"unknown bundled assessment '{case}'; available: {', '.join(ASSESSMENT_IDS)}"
        )
    return AssessmentRecord.from_json_dict(_read(f"assessment_{case}"))
