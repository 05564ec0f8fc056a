"""HTTP interface over the assessor workbench.

Reference data is served read-only; session mutations go through envelopes
whose expected revision must match the stored session, otherwise the call
fails with 409 and the current revision so clients can refetch and replay.
"""
from __future__ import annotations

import os
import uuid
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .assessment import (
    AML_PROTOCOLS,
    AssessmentError,
    DivergenceThresholds,
    ScenarioStatus,
    TeamMode,
    create_session,
    divergence_flags,
    next_aspects,
)
from .calculus import (
    DEATHS_TABLE,
    DOLLAR_DAMAGE_TABLE,
    HSL_LABELS,
    HSL_REFERENCE_ROWS,
    RISK_MATRIX,
    LikelihoodLevel,
    ll_band,
)
from .pathway import PathwayError, operator_catalog
from .reporting import (
    DEFAULT_SCHEME,
    ReportingError,
    emit_output_log,
    output_log_to_dict,
    report_card,
    report_card_to_dict,
    tallied_matrix,
    tallied_matrix_to_dict,
)
from .taxonomy import (
    RubricSet,
    Taxonomy,
    TaxonomyError,
    bundled_rubrics,
    bundled_taxonomy,
    rubrics_to_dict,
    taxonomy_to_dict,
)
from .workbook import (
    FORMAT_VERSION,
    MutationEnvelope,
    RevisionConflict,
    SessionStore,
    WorkbookDocument,
    WorkbookError,
    _system_info_from_dict,
    document_to_dict,
)

WORKBOOK_DIR_ENV = "PRA_WORKBOOK_DIR"


class NotFound(Exception):
    def __init__(self, what: str):
        self.what = what
        super().__init__(what)


class MutationBody(BaseModel):
    expected_revision: int
    command: str
    args: dict = Field(default_factory=dict)
    actor: str = ""


class FinalizeBody(BaseModel):
    expected_revision: int
    actor: str = ""


class OutputLogBody(BaseModel):
    completed_at: datetime


class SessionCreateBody(BaseModel):
    aml_code: str
    team_mode: str
    system_info: dict
    id: Optional[str] = None
    framework_version: str = "v0.9.1-alpha"
    divergence_thresholds: Optional[dict] = None


def default_store_root() -> Path:
    return Path(os.environ.get(WORKBOOK_DIR_ENV, "workbooks"))


def create_app(
    store: Union[SessionStore, str, Path, None] = None,
    taxonomy: Optional[Taxonomy] = None,
    rubrics: Optional[RubricSet] = None,
) -> FastAPI:
    if store is None:
        store = SessionStore(default_store_root())
    elif not isinstance(store, SessionStore):
        store = SessionStore(store)
    taxonomy = taxonomy or bundled_taxonomy()
    rubrics = rubrics or bundled_rubrics()

    app = FastAPI(title="pra-workbench", version="0.1.0")

    @app.exception_handler(RevisionConflict)
    async def _conflict(request: Request, exc: RevisionConflict) -> JSONResponse:
        return JSONResponse(
            status_code=409,
            content={"detail": str(exc), "current_revision": exc.current_revision},
        )

    @app.exception_handler(NotFound)
    async def _missing(request: Request, exc: NotFound) -> JSONResponse:
        return JSONResponse(status_code=404, content={"detail": exc.what})

    for error_cls in (AssessmentError, WorkbookError, ReportingError,
                      PathwayError, TaxonomyError):
        @app.exception_handler(error_cls)
        async def _rejected(request: Request, exc: Exception) -> JSONResponse:
            return JSONResponse(status_code=422, content={"detail": str(exc)})

    def get_doc(session_id: str) -> WorkbookDocument:
        try:
            return store.get(session_id, taxonomy)
        except KeyError:
            raise NotFound(f"no session with id {session_id!r}") from None

    @app.get("/reference/taxonomy")
    def reference_taxonomy() -> dict:
        return taxonomy_to_dict(taxonomy)

    @app.get("/reference/rubrics")
    def reference_rubrics() -> dict:
        return rubrics_to_dict(rubrics)

    @app.get("/reference/operators")
    def reference_operators() -> dict:
        return {
            "operators": [
                {
                    "name": op.name,
                    "category": op.category.value,
                    "description": op.description,
                }
                for op in operator_catalog()
            ]
        }

    @app.get("/reference/tables")
    def reference_tables() -> dict:
        return {
            "risk_matrix": [list(row) for row in RISK_MATRIX],
            "ll_bands": [
                {
                    "level": int(level),
                    "lower": ll_band(level).lower,
                    "upper": ll_band(level).upper,
                }
                for level in LikelihoodLevel
            ],
            "hsl_labels": {str(k): v for k, v in HSL_LABELS.items()},
            "hsl_thresholds": {
                DEATHS_TABLE.dimension.value: list(DEATHS_TABLE.thresholds),
                DOLLAR_DAMAGE_TABLE.dimension.value: list(DOLLAR_DAMAGE_TABLE.thresholds),
            },
            "hsl_reference_rows": [
                {"dimension": row.dimension, "values": list(row.values), "note": row.note}
                for row in HSL_REFERENCE_ROWS
            ],
            "aml_protocols": [
                {
                    "code": p.code,
                    "assess_focused_range": p.assess_focused_range,
                    "assess_aspect_group": p.assess_aspect_group,
                    "consider_aspect_level": p.consider_aspect_level,
                    "assess_aspect_level": p.assess_aspect_level,
                    "assess_second_order": p.assess_second_order,
                    "assess_propagation_operators": p.assess_propagation_operators,
                }
                for p in AML_PROTOCOLS.values()
            ],
            "focused_scheme": {
                "name": DEFAULT_SCHEME.name,
                "dimensions": [
                    {"id": d.id, "label": d.label, "definition": d.definition}
                    for d in DEFAULT_SCHEME.dimensions
                ],
            },
        }

    @app.get("/sessions")
    def list_sessions() -> dict:
        return {"sessions": store.list_ids()}

    @app.post("/sessions", status_code=201)
    def create(body: SessionCreateBody) -> dict:
        info = _system_info_from_dict(body.system_info)
        thresholds = DivergenceThresholds()
        if body.divergence_thresholds:
            thresholds = DivergenceThresholds(
                ll_delta=int(body.divergence_thresholds.get("ll_delta", 2)),
                hsl_delta=int(body.divergence_thresholds.get("hsl_delta", 1)),
            )
        try:
            mode = TeamMode(body.team_mode)
        except ValueError:
            raise AssessmentError(
                f"team_mode must be 'single' or 'team', got {body.team_mode!r}"
            ) from None
        session = create_session(
            session_id=body.id or uuid.uuid4().hex[:12],
            system_info=info,
            aml_code=body.aml_code,
            framework_version=body.framework_version,
            team_mode=mode,
            divergence_thresholds=thresholds,
        )
        doc = WorkbookDocument(
            format_version=FORMAT_VERSION,
            taxonomy_version=taxonomy.version,
            session=session,
        )
        store.create(doc)
        return document_to_dict(doc)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return document_to_dict(get_doc(session_id))

    @app.get("/sessions/{session_id}/aspects")
    def get_aspects(session_id: str) -> dict:
        doc = get_doc(session_id)
        pending = next_aspects(doc.session, taxonomy)
        return {
            "working_aspects": [
                {"id": aspect_id, "label": taxonomy.node(aspect_id).label}
                for aspect_id in pending
            ],
            "completed": [
                {"aspect_id": c.aspect_id, "rationale": c.rationale}
                for c in doc.session.aspect_completion
            ],
        }

    @app.post("/sessions/{session_id}/mutations")
    def post_mutation(session_id: str, body: MutationBody) -> dict:
        get_doc(session_id)
        envelope = MutationEnvelope(
            expected_revision=body.expected_revision,
            command=body.command,
            args=body.args,
            actor=body.actor,
        )
        doc, payload = store.mutate(session_id, envelope, taxonomy)
        return {"result": payload, "session": document_to_dict(doc)["session"]}

    @app.get("/sessions/{session_id}/divergences")
    def get_divergences(session_id: str) -> dict:
        doc = get_doc(session_id)
        report = []
        for scenario in doc.session.scenarios:
            if scenario.status not in (ScenarioStatus.ESTIMATED, ScenarioStatus.RECALIBRATING):
                continue
            flags = divergence_flags(scenario, doc.session.divergence_thresholds)
            report.append({
                "scenario_id": scenario.id,
                "status": scenario.status.value,
                "flags": [
                    {
                        "outcome_index": f.outcome_index,
                        "hsl_spread": f.hsl_spread,
                        "ll_spread": f.ll_spread,
                        "message": f.message,
                    }
                    for f in flags
                ],
            })
        return {"scenarios": report}

    @app.post("/sessions/{session_id}/finalize")
    def post_finalize(session_id: str, body: FinalizeBody) -> dict:
        get_doc(session_id)
        envelope = MutationEnvelope(
            expected_revision=body.expected_revision,
            command="finalize",
            args={},
            actor=body.actor,
        )
        doc, payload = store.mutate(session_id, envelope, taxonomy)
        return {"result": payload, "session": document_to_dict(doc)["session"]}

    @app.get("/sessions/{session_id}/report-card")
    def get_report_card(session_id: str, scheme: str = "default") -> dict:
        doc = get_doc(session_id)
        if scheme != DEFAULT_SCHEME.name:
            raise ReportingError(
                f"unknown focused scheme {scheme!r}; this service serves "
                f"{DEFAULT_SCHEME.name!r}"
            )
        return report_card_to_dict(report_card(doc.session, taxonomy, DEFAULT_SCHEME))

    @app.get("/sessions/{session_id}/tallied-matrix")
    def get_tallied_matrix(session_id: str) -> dict:
        doc = get_doc(session_id)
        return tallied_matrix_to_dict(tallied_matrix(doc.session))

    @app.post("/sessions/{session_id}/output-log")
    def post_output_log(session_id: str, body: OutputLogBody) -> dict:
        doc = get_doc(session_id)
        log = emit_output_log(doc.session, body.completed_at)
        store.record_output(session_id, log.content_digest)
        return output_log_to_dict(log)

    return app
