"""HTTP API over the case store, classifier and report pipeline.

Each case walks the forward-only status machine
``created -> classified -> reported -> graded -> scored``.  Mutations are
idempotent under retry: classify, report and score re-requests return the
stored result instead of recomputing.  Errors are JSON envelopes
``{code, message, detail}``; 409 marks both illegal transitions and stale
revisions, 502 an unreachable LLM backend, 422 an LLM reply that cannot be
parsed into the three report sections.

The request bodies are parsed by hand rather than through response-model
machinery so that every validation problem maps to a 400 envelope and 422
stays reserved for malformed model output.
"""

from __future__ import annotations

import datetime
import math
import os
import threading

import numpy as np
import torch
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import agent as agent_mod
from ..agent import (
    ClinicalContext,
    DiagnosisOpinion,
    DiagnosisReport,
    LLMBackendSpec,
    MockChatBackend,
    build_prompt,
    generate_report,
    opinion_from_probs,
)
from ..assessment import (
    Grade,
    aggregate_likert,
    final_display,
    final_score,
    meteor,
    report_text_for_scoring,
)
from ..ctu_net import batch_from_samples, load_model
from ..exceptions import (
    BackendUnavailableError,
    DecodeError,
    MalformedOutputError,
    StoreConflictError,
    TransitionError,
    ValidationError,
)
from ..video_data import ManifestEntry, load_video
from .store import CaseStore, new_case_id

STATUS_ORDER = ("created", "classified", "reported", "graded", "scored")

DEFAULT_MAX_UPLOAD_BYTES = 64 * 1024 * 1024
DEFAULT_LLM_INFLIGHT = 2

_CAS_ATTEMPTS = 16


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _status_index(status: str) -> int:
    return STATUS_ORDER.index(status)


def _require_status(payload: dict, allowed: tuple[str, ...], action: str) -> None:
    status = payload["status"]
    if status not in allowed:
        raise TransitionError(
            f"cannot {action} while case status is {status!r} "
            f"(allowed: {', '.join(allowed)})"
        )


def _advance(payload: dict, new_status: str) -> None:
    if _status_index(new_status) != _status_index(payload["status"]) + 1:
        raise TransitionError(
            f"illegal transition {payload['status']!r} -> {new_status!r}"
        )
    payload["status"] = new_status
    payload["timestamps"][new_status] = _now()


def default_backend(spec: LLMBackendSpec | None = None):
    """Mock backend unless an LLM endpoint is configured in the environment."""
    endpoint = os.environ.get("AUTOUS_LLM_ENDPOINT", "")
    if spec is None:
        if endpoint:
            spec = LLMBackendSpec(
                kind="http_chat",
                endpoint_url=endpoint,
                auth_token=os.environ.get("AUTOUS_LLM_TOKEN", ""),
            )
        else:
            spec = LLMBackendSpec(kind="mock")
    return agent_mod.backend_from_spec(spec), spec


def create_app(
    store_dir: str | None = None,
    checkpoint_path: str | None = None,
    backend=None,
    backend_spec: LLMBackendSpec | None = None,
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES,
    llm_inflight: int = DEFAULT_LLM_INFLIGHT,
    compact_after: int = 64,
) -> FastAPI:
    store_dir = store_dir or os.environ.get("AUTOUS_STORE_DIR", "")
    if not store_dir:
        raise ValidationError(
            "no store directory (pass store_dir or set AUTOUS_STORE_DIR)"
        )
    store = CaseStore(store_dir, compact_after=compact_after)

    model = None
    model_config = None
    if checkpoint_path:
        model = load_model(checkpoint_path)
        model.eval()
        model_config = model.config

    if backend is None:
        backend, backend_spec = default_backend(backend_spec)
    elif backend_spec is None:
        backend_spec = LLMBackendSpec(kind="mock")

    app = FastAPI(title="autous case service")
    app.state.store = store
    app.state.model = model
    app.state.model_config = model_config
    app.state.backend = backend
    app.state.backend_spec = backend_spec
    app.state.max_upload_bytes = max_upload_bytes
    app.state.llm_semaphore = threading.Semaphore(llm_inflight)
    app.state.model_lock = threading.Lock()

    def error_response(status_code: int, code: str, message: str, detail=None):
        return JSONResponse(
            status_code=status_code,
            content={"code": code, "message": message, "detail": detail},
        )

    @app.exception_handler(ValidationError)
    async def _validation(_req, exc):
        return error_response(400, "validation", str(exc))

    @app.exception_handler(DecodeError)
    async def _decode(_req, exc):
        return error_response(400, "decode", str(exc))

    @app.exception_handler(TransitionError)
    async def _transition(_req, exc):
        return error_response(409, "conflict", str(exc))

    @app.exception_handler(StoreConflictError)
    async def _conflict(_req, exc):
        return error_response(409, "conflict", str(exc))

    @app.exception_handler(KeyError)
    async def _missing(_req, exc):
        return error_response(404, "not_found", f"unknown case {exc.args[0]!r}")

    @app.exception_handler(BackendUnavailableError)
    async def _unavailable(_req, exc):
        return error_response(502, "backend_unavailable", str(exc))

    @app.exception_handler(MalformedOutputError)
    async def _malformed(_req, exc):
        return error_response(
            422, "malformed_output", str(exc),
            detail={"raw_text": getattr(exc, "raw_text", "")},
        )

    async def read_json(request: Request) -> dict:
        try:
            data = await request.json()
        except Exception as exc:
            raise ValidationError(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("request body must be a JSON object")
        return data

    def update_case(case_id: str, mutate) -> dict:
        """Read-modify-write with CAS retry; ``mutate`` edits the payload."""
        for _ in range(_CAS_ATTEMPTS):
            payload, revision = store.get(case_id)
            mutate(payload)
            try:
                store.put(case_id, payload, revision)
            except StoreConflictError:
                continue
            return payload
        raise StoreConflictError(
            f"case {case_id}: persistent write contention, giving up"
        )

    # ------------------------------------------------------------------
    # Case lifecycle
    # ------------------------------------------------------------------

    @app.get("/api/health")
    async def health():
        return {
            "status": "ok",
            "model_loaded": model is not None,
            "backend": backend_spec.kind,
        }

    @app.post("/api/cases", status_code=201)
    async def create_case(request: Request):
        body = await read_json(request)
        raw_ctx = body.get("context")
        if not isinstance(raw_ctx, dict):
            raise ValidationError("body must carry a 'context' object")
        ctx = ClinicalContext(
            chief_complaint=str(raw_ctx.get("chief_complaint", "")),
            physical_exam=str(raw_ctx.get("physical_exam", "")),
            additional_info=str(raw_ctx.get("additional_info", "")),
        )
        case_id = new_case_id()
        payload = {
            "case_id": case_id,
            "status": "created",
            "context": {
                "chief_complaint": ctx.chief_complaint,
                "physical_exam": ctx.physical_exam,
                "additional_info": ctx.additional_info,
            },
            "video_ref": None,
            "opinion": None,
            "report": None,
            "grades": [],
            "score": None,
            "timestamps": {"created": _now()},
        }
        store.create(payload, case_id=case_id)
        return JSONResponse(
            status_code=201, content={"case_id": case_id, "status": "created"}
        )

    @app.get("/api/cases")
    async def list_cases():
        cases = []
        for case_id, payload, _rev in store.load_all():
            opinion = payload.get("opinion") or {}
            score = payload.get("score") or {}
            cases.append(
                {
                    "case_id": case_id,
                    "status": payload["status"],
                    "label": opinion.get("label"),
                    "final": score.get("final"),
                    "final_display": score.get("final_display"),
                    "created": payload["timestamps"].get("created"),
                }
            )
        return {"cases": cases}

    @app.get("/api/cases/{case_id}")
    async def get_case(case_id: str):
        payload, revision = store.get(case_id)
        return {**payload, "case_id": case_id, "revision": revision}

    # ------------------------------------------------------------------
    # Workflow steps
    # ------------------------------------------------------------------

    @app.post("/api/cases/{case_id}/video")
    async def upload_video(case_id: str, request: Request):
        declared = request.headers.get("content-length")
        if declared and int(declared) > max_upload_bytes:
            raise ValidationError(
                f"upload exceeds cap of {max_upload_bytes} bytes"
            )
        data = await request.body()
        if len(data) > max_upload_bytes:
            raise ValidationError(f"upload exceeds cap of {max_upload_bytes} bytes")
        if not data:
            raise ValidationError("empty upload")

        payload, _ = store.get(case_id)
        _require_status(payload, ("created",), "attach video")

        filename = request.query_params.get("filename", "")
        suffix = os.path.splitext(filename)[1]
        if not suffix:
            # Zip magic means an npz fixture; anything else goes to OpenCV.
            suffix = ".npz" if data[:2] == b"PK" else ".avi"
        blob_path = store.save_blob(case_id, data, suffix)

        def mutate(p):
            _require_status(p, ("created",), "attach video")
            p["video_ref"] = blob_path
            p["video_bytes"] = len(data)

        update_case(case_id, mutate)
        return {"case_id": case_id, "video_ref": blob_path, "bytes": len(data)}

    @app.post("/api/cases/{case_id}/classify")
    async def classify(case_id: str):
        payload, _ = store.get(case_id)
        if payload["opinion"] is not None:
            return payload["opinion"]
        _require_status(payload, ("created",), "classify")
        if not payload.get("video_ref"):
            raise ValidationError("no video attached to this case")
        if model is None:
            raise ValidationError("service has no checkpoint loaded")

        t, h, w, _c = model_config.input_shape
        entry = ManifestEntry(
            id=case_id,
            media_path=payload["video_ref"],
            class_id=0,
            source_dataset="upload",
            num_frames=1,
        )
        sample = load_video(entry, (h, w), t)
        frames, _labels = batch_from_samples([sample])
        with app.state.model_lock, torch.no_grad():
            pred = model(frames)
        probs = pred.probs[0].numpy()
        opinion = opinion_from_probs(probs)
        stored = {
            "class_id": opinion.class_id,
            "label": opinion.label_text,
            "confidence": opinion.confidence,
            "probs": [float(p) for p in probs],
            "guideline_tag": opinion.guideline_tag,
            "tie": opinion.tie,
        }

        def mutate(p):
            if p["opinion"] is not None:
                return
            _require_status(p, ("created",), "classify")
            p["opinion"] = stored
            _advance(p, "classified")

        updated = update_case(case_id, mutate)
        return updated["opinion"]

    @app.post("/api/cases/{case_id}/report")
    async def report(case_id: str):
        payload, _ = store.get(case_id)
        if payload["report"] is not None:
            return payload["report"]
        _require_status(payload, ("classified",), "generate report")

        stored_op = payload["opinion"]
        opinion = DiagnosisOpinion(
            class_id=stored_op["class_id"],
            label_text=stored_op["label"],
            confidence=stored_op["confidence"],
            guideline_tag=stored_op["guideline_tag"],
            tie=stored_op["tie"],
        )
        ctx = ClinicalContext(**payload["context"])
        prompt = build_prompt(opinion, ctx)
        with app.state.llm_semaphore:
            result = generate_report(prompt, backend, spec=backend_spec)
        stored = {
            "preliminary_diagnosis": result.preliminary_diagnosis,
            "justification": result.justification,
            "follow_up": result.follow_up,
            "raw_response": result.raw_response,
            "model_id": result.model_id,
            "latency_ms": result.latency_ms,
        }

        def mutate(p):
            if p["report"] is not None:
                return
            _require_status(p, ("classified",), "generate report")
            p["report"] = stored
            _advance(p, "reported")

        updated = update_case(case_id, mutate)
        return updated["report"]

    @app.post("/api/cases/{case_id}/grades")
    async def add_grade(case_id: str, request: Request):
        body = await read_json(request)
        try:
            score_value = int(body.get("score"))
        except (TypeError, ValueError):
            raise ValidationError("score must be an integer 1..5")
        grade = Grade(
            rater_id=str(body.get("rater_id", "")),
            role=str(body.get("role", "")),
            score=score_value,
        )
        if not grade.rater_id:
            raise ValidationError("rater_id must be non-empty")

        payload, _ = store.get(case_id)
        _require_status(payload, ("reported", "graded"), "record grade")

        def mutate(p):
            _require_status(p, ("reported", "graded"), "record grade")
            entry = {
                "rater_id": grade.rater_id,
                "role": grade.role,
                "score": grade.score,
            }
            grades = [g for g in p["grades"] if g["rater_id"] != grade.rater_id]
            grades.append(entry)
            p["grades"] = grades
            if p["status"] == "reported":
                _advance(p, "graded")

        updated = update_case(case_id, mutate)
        return {"case_id": case_id, "grades": updated["grades"]}

    @app.post("/api/cases/{case_id}/score")
    async def score(case_id: str, request: Request):
        body = await read_json(request)
        payload, _ = store.get(case_id)
        if payload["score"] is not None:
            return payload["score"]
        _require_status(payload, ("graded",), "score")

        reference = str(body.get("reference_text", ""))
        override = body.get("meteor")
        if override is not None:
            if isinstance(override, bool) or not isinstance(override, (int, float)):
                raise ValidationError("meteor must be a number in [0, 1]")
            m = float(override)
            if not math.isfinite(m) or not 0.0 <= m <= 1.0:
                raise ValidationError("meteor must be a number in [0, 1]")
        elif not reference.strip():
            raise ValidationError(
                "provide a non-empty reference_text or an explicit meteor"
            )

        grades = [
            Grade(rater_id=g["rater_id"], role=g["role"], score=g["score"])
            for g in payload["grades"]
        ]
        s_amateur, s_expert = aggregate_likert(grades)
        if override is None:
            rep = payload["report"]
            report_obj = DiagnosisReport(
                preliminary_diagnosis=rep["preliminary_diagnosis"],
                justification=rep["justification"],
                follow_up=rep["follow_up"],
            )
            m = meteor(report_text_for_scoring(report_obj), reference)
        final = final_score(s_amateur, s_expert, m)
        stored = {
            "S_amateur": s_amateur,
            "S_expert": s_expert,
            "meteor": m,
            "final": final,
            "final_display": final_display(final),
            "reference_text": reference,
        }

        def mutate(p):
            if p["score"] is not None:
                return
            _require_status(p, ("graded",), "score")
            p["score"] = stored
            _advance(p, "scored")

        updated = update_case(case_id, mutate)
        return updated["score"]

    return app
