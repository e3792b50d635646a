"""HTTP service exposing the engine: frameworks, versioned assessments,
pipeline and what-if computation, Delphi rounds, AHP derivation, and the
stage-table CSV export.

Errors always carry the structured body {code, message, field_path}; 4xx
for input problems, 5xx for internal faults. Mutating endpoints accept a
client-supplied request_id and replay the original response on retry.
"""

from __future__ import annotations

import io
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import Depends, FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import fixtures
from .ahp import PairwiseMatrix, aggregate_experts, consistency, derive_weights
from .delphi import (
    CONSENSUS_THRESHOLD,
    DelphiStudy,
    ExpertSubmission,
    stability,
)
from .errors import NumericsError, SchemaError, TemaiError, ValidationError
from .framework import AssessmentRecord, validate_framework
from .pipeline import DEFAULT_MODE, MODES, converted_scores, run_pipeline
from .report import stage_table_rows
from .store import Store, StudyDocument
from .valuation import classify_quadrant, quadrant_grid, what_if

#: study that holds assessments posted through /assessments
WORKBENCH_STUDY = "workbench"


@dataclass
class ApiConfig:
    port: int = 8000
    data_dir: str = "./temai_data"
    consensus_threshold: float = CONSENSUS_THRESHOLD
    api_token: str | None = None


def load_config(path: str | None = None) -> ApiConfig:
    """Config file first, environment overrides second (PORT, DATA_DIR,
    CONSENSUS_THRESHOLD, API_TOKEN)."""
    config = ApiConfig()
    if path:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        config.port = int(doc.get("port", config.port))
        config.data_dir = doc.get("data_dir", config.data_dir)
        config.consensus_threshold = float(
            doc.get("consensus_threshold", config.consensus_threshold)
        )
        config.api_token = doc.get("api_token", config.api_token)
    if os.environ.get("PORT"):
        config.port = int(os.environ["PORT"])
    if os.environ.get("DATA_DIR"):
        config.data_dir = os.environ["DATA_DIR"]
    if os.environ.get("CONSENSUS_THRESHOLD"):
        config.consensus_threshold = float(os.environ["CONSENSUS_THRESHOLD"])
    if os.environ.get("API_TOKEN"):
        config.api_token = os.environ["API_TOKEN"]
    return config


# -- request bodies ------------------------------------------------------------


class AssessmentIn(BaseModel):
    assessment_id: str
    weight_table: str
    ratings: dict[str, int]
    provenance: dict[str, str] = Field(default_factory=dict)
    framework_id: str = "temai"
    created_at: str = ""
    request_id: str | None = None


class InterventionIn(BaseModel):
    criterion: str
    level: int


class WhatIfIn(BaseModel):
    interventions: list[InterventionIn]
    mode: str = DEFAULT_MODE


class SubmissionIn(BaseModel):
    expert_id: str
    rankings: dict[str, int] | None = None
    ratings: dict[str, int] | None = None


class RoundIn(BaseModel):
    round: int | None = None
    submissions: list[SubmissionIn]
    request_id: str | None = None


class MatrixIn(BaseModel):
    items: list[str]
    values: list[list[float]]


class DeriveIn(BaseModel):
    matrices: list[MatrixIn]
    method: str = "eigenvector"


def create_app(config: ApiConfig | None = None) -> FastAPI:
    config = config or load_config()
    app = FastAPI(title="temai", version="0.1.0")
    # the browser workbench is served separately and talks to this API only
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    framework = fixtures.load_framework()
    weight_tables = {
        table_id: fixtures.load_weight_table(table_id)
        for table_id in fixtures.WEIGHT_TABLE_IDS
    }
    store = Store(config.data_dir)
    studies: dict[str, DelphiStudy] = {}
    idempotency: dict[tuple[str, str], dict] = {}
    state_lock = threading.Lock()

    def workbench() -> StudyDocument:
        if store.exists(WORKBENCH_STUDY):
            return store.load(WORKBENCH_STUDY)
        doc = StudyDocument(WORKBENCH_STUDY, framework_id=framework.framework_id)
        # seed with the bundled case studies so the service is usable
        # immediately after first start
        for case in fixtures.ASSESSMENT_IDS:
            doc.add_assessment(fixtures.load_assessment(case))
        store.save(doc)
        return doc

    def study_doc(study_id: str) -> StudyDocument:
        if store.exists(study_id):
            return store.load(study_id)
        return StudyDocument(study_id, framework_id=framework.framework_id)

    def delphi_study(study_id: str, doc: StudyDocument) -> DelphiStudy:
        if study_id not in studies:
            studies[study_id] = DelphiStudy.from_summaries(
                study_id, doc.round_summaries(), threshold=config.consensus_threshold
            )
        return studies[study_id]

    def weights_for(record: AssessmentRecord):
        table = weight_tables.get(record.weight_table)
        if table is None:
            raise ValidationError(
                f"assessment references unknown weight table '{record.weight_table}'",
                field_path="weight_table",
            )
        return table

    def find_assessment(assessment_id: str, version: int | None) -> AssessmentRecord:
        doc = workbench()
        if version is None:
            return doc.latest_assessment(assessment_id)
        return doc.assessment_version(assessment_id, version)

    # -- auth -------------------------------------------------------------

    async def require_token(request: Request) -> None:
        if config.api_token is None:
            return
        supplied = request.headers.get("Authorization", "")
        if supplied != f"Bearer {config.api_token}":
            raise _AuthError()

    class _AuthError(Exception):
        pass

    guarded = [Depends(require_token)]

    # -- error shaping -------------------------------------------------------

    def error_body(code: str, message: str, field_path: str | None = None) -> dict:
        return {"code": code, "message": message, "field_path": field_path}

    @app.exception_handler(_AuthError)
    async def _auth_error(request: Request, exc: _AuthError):
        return JSONResponse(
            status_code=401, content=error_body("unauthorized", "missing or bad API token")
        )

    @app.exception_handler(ValidationError)
    async def _validation_error(request: Request, exc: ValidationError):
        return JSONResponse(
            status_code=422,
            content=error_body(exc.code, str(exc), getattr(exc, "field_path", None)),
        )

    @app.exception_handler(SchemaError)
    async def _schema_error(request: Request, exc: SchemaError):
        return JSONResponse(status_code=400, content=error_body(exc.code, str(exc)))

    @app.exception_handler(NumericsError)
    async def _numerics_error(request: Request, exc: NumericsError):
        return JSONResponse(status_code=422, content=error_body(exc.code, str(exc)))

    @app.exception_handler(TemaiError)
    async def _engine_error(request: Request, exc: TemaiError):
        return JSONResponse(status_code=500, content=error_body("internal", str(exc)))

    @app.exception_handler(RequestValidationError)
    async def _request_validation(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = [str(part) for part in first.get("loc", []) if part != "body"]
        field_path = ""
        for part in loc:
            field_path = f"{field_path}[{part}]" if part.isdigit() else (
                f"{field_path}.{part}" if field_path else part
            )
        return JSONResponse(
            status_code=422,
            content=error_body("validation", first.get("msg", "invalid request"), field_path or None),
        )

    # -- frameworks --------------------------------------------------------

    @app.get("/frameworks", dependencies=guarded)
    def list_frameworks():
        report = validate_framework(framework)
        return {
            "frameworks": [
                {
                    "framework": framework.to_json_dict(),
                    "validation": report.to_json_dict(),
                }
            ]
        }

    @app.get("/frameworks/{framework_id}", dependencies=guarded)
    def get_framework(framework_id: str):
        if framework_id != framework.framework_id:
            return JSONResponse(
                status_code=404,
                content=error_body("not_found", f"no framework '{framework_id}'"),
            )
        return {
            "framework": framework.to_json_dict(),
            "validation": {
                table_id: validate_framework(framework, table).to_json_dict()
                for table_id, table in weight_tables.items()
            },
        }

    # -- assessments ---------------------------------------------------------

    @app.post("/assessments", dependencies=guarded, status_code=201)
    def create_assessment(body: AssessmentIn):
        if body.request_id is not None:
            with state_lock:
                replay = idempotency.get(("assessments", body.request_id))
            if replay is not None:
                return replay
        record = AssessmentRecord(
            assessment_id=body.assessment_id,
            framework_id=body.framework_id,
            weight_table=body.weight_table,
            ratings=body.ratings,
            provenance=body.provenance or {c: "user_entered" for c in body.ratings},
            created_at=body.created_at,
        )
        record.validate_against(framework)
        weights_for(record)
        doc = workbench()
        stored = doc.add_assessment(record)
        store.save(doc)
        payload = {"assessment": stored.to_json_dict(), "version": stored.version}
        if body.request_id is not None:
            with state_lock:
                idempotency[("assessments", body.request_id)] = payload
        return payload

    @app.get("/assessments/{assessment_id}", dependencies=guarded)
    def get_assessment(assessment_id: str, version: int | None = Query(default=None)):
        record = find_assessment(assessment_id, version)
        return {"assessment": record.to_json_dict(), "version": record.version}

    @app.post("/assessments/{assessment_id}/pipeline", dependencies=guarded)
    def run_assessment_pipeline(
        assessment_id: str,
        mode: str = Query(default=DEFAULT_MODE),
        version: int | None = Query(default=None),
    ):
        if mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {mode!r}", field_path="mode")
        record = find_assessment(assessment_id, version)
        weights = weights_for(record)
        scores = run_pipeline(record, weights, mode, framework)
        doc = workbench()
        doc.cache_result(record, weights, scores)
        store.save(doc)
        return {
            "assessment_id": assessment_id,
            "version": record.version,
            "mode": mode,
            "stage_scores": scores.to_json_dict(),
            "display": scores.display_dict(),
            "converted_scores": {
                dim: [row.to_json_dict() for row in converted_scores(record, weights, dim, mode, framework)]
                for dim in ("capability", "adoption", "utility")
            },
        }

    @app.post("/assessments/{assessment_id}/whatif", dependencies=guarded)
    def run_what_if(
        assessment_id: str, body: WhatIfIn, version: int | None = Query(default=None)
    ):
        if body.mode not in MODES:
            raise ValidationError(
                f"mode must be one of {MODES}, got {body.mode!r}", field_path="mode"
            )
        record = find_assessment(assessment_id, version)
        weights = weights_for(record)
        report = what_if(
            record,
            weights,
            body.mode,
            [(iv.criterion, iv.level) for iv in body.interventions],
            framework,
        )
        payload = report.to_json_dict()
        payload["display"] = {
            "before": report.before.display_dict(),
            "after": report.after.display_dict(),
        }
        return payload

    @app.get("/assessments/{assessment_id}/report.csv", dependencies=guarded)
    def assessment_report_csv(assessment_id: str, version: int | None = Query(default=None)):
        record = find_assessment(assessment_id, version)
        weights = weights_for(record)
        rows = stage_table_rows(record, weights, framework)
        buffer = io.StringIO()
        import csv as _csv

        writer = _csv.DictWriter(buffer, fieldnames=["assessment_id", "mode", "stage", "value"])
        writer.writeheader()
        writer.writerows(rows)
        return Response(content=buffer.getvalue(), media_type="text/csv")

    # -- delphi studies ---------------------------------------------------------

    @app.post("/studies/{study_id}/rounds", dependencies=guarded, status_code=201)
    def post_round(study_id: str, body: RoundIn):
        if body.request_id is not None:
            with state_lock:
                replay = idempotency.get((f"rounds:{study_id}", body.request_id))
            if replay is not None:
                return replay
        doc = study_doc(study_id)
        study = delphi_study(study_id, doc)
        round_number = body.round if body.round is not None else len(study.rounds) + 1
        submissions = [
            ExpertSubmission(
                expert_id=sub.expert_id,
                round=round_number,
                rankings=sub.rankings,
                ratings=sub.ratings,
            )
            for sub in body.submissions
        ]
        summary = study.run_round(submissions, round_number)
        doc.add_round(summary, [sub.model_dump(exclude={"request_id"}) for sub in body.submissions])
        store.save(doc)
        payload = {"summary": summary.to_json_dict()}
        if len(study.rounds) >= 2:
            payload["stability"] = stability(
                study.rounds[-2], study.rounds[-1], bound=study.stability_bound
            ).to_json_dict()
        if body.request_id is not None:
            with state_lock:
                idempotency[(f"rounds:{study_id}", body.request_id)] = payload
        return payload

    @app.get("/studies/{study_id}/rounds", dependencies=guarded)
    def get_rounds(study_id: str):
        doc = study_doc(study_id)
        study = delphi_study(study_id, doc)
        summaries = study.rounds
        chain = [
            stability(a, b, bound=study.stability_bound).to_json_dict()
            for a, b in zip(summaries, summaries[1:])
            if set(a.aggregate_ranking) == set(b.aggregate_ranking)
        ]
        return {
            "study_id": study_id,
            "rounds": [s.to_json_dict() for s in summaries],
            "stability": chain,
            "consensus_reached": bool(summaries) and summaries[-1].concordance.consensus_reached,
        }

    # -- ahp ------------------------------------------------------------------

    @app.post("/ahp/derive", dependencies=guarded)
    def ahp_derive(body: DeriveIn):
        if not body.matrices:
            raise ValidationError("at least one matrix is required", field_path="matrices")
        matrices = [
            PairwiseMatrix.from_json_dict(m.model_dump()) for m in body.matrices
        ]
        combined = aggregate_experts(matrices)
        weights = derive_weights(combined, body.method)
        return {
            "items": list(weights.items),
            "weights": list(weights.weights),
            "method": body.method,
            "consistency": consistency(combined).to_json_dict(),
            "per_matrix_consistency": [consistency(m).to_json_dict() for m in matrices],
        }

    # -- quadrant ----------------------------------------------------------------

    @app.get("/quadrant", dependencies=guarded)
    def quadrant(
        regulatory: float = Query(...),
        support: float = Query(...),
        regulatory_threshold: float = Query(default=50.0),
        support_threshold: float = Query(default=50.0),
    ):
        thresholds = (regulatory_threshold, support_threshold)
        position = classify_quadrant(regulatory, support, thresholds)
        return {"position": position.to_json_dict(), "grid": quadrant_grid(thresholds)}

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    return app


def serve(config: ApiConfig | None = None) -> None:
    import uvicorn

    config = config or load_config()
    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)
