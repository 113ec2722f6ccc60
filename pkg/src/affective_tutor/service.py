"""HTTP+JSON wire interface to the tutoring engine.

Every response carries {"ok": bool, ...}; failures add {"error": {code,
message}}. Learner tokens map to learner ids, the admin token to course
administration. Clip analysis runs behind a bounded semaphore so a burst
of uploads cannot oversubscribe the box.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

from fastapi import Body, Depends, FastAPI, Header, Request
from fastapi.responses import JSONResponse

from .aggregator import load_feedback_catalog
from .clips import clip_from_dict
from .config import ThresholdConfig, load_threshold_config
from .course import course_from_dict
from .engine import TutorEngine
from .errors import (
    AccessError,
    AuthError,
    ConfigError,
    FrameValidationError,
    NoDataError,
    NotFoundError,
    TutorError,
    ValidationError,
)
from .metrics import render_learner_report_csv, render_learner_report_text
from .storage import JsonlStore

DEFAULT_ANALYZER_WORKERS = 4  # concurrent-analysis budget

_STATUS_BY_ERROR = (
    (AuthError, 401),
    (AccessError, 403),
    (NotFoundError, 404),
    (NoDataError, 409),
    (FrameValidationError, 422),
    (ConfigError, 422),
    (ValidationError, 400),
)


def _status_for(exc: TutorError) -> int:
    for cls, status in _STATUS_BY_ERROR:
        if isinstance(exc, cls):
            return status
    return 500


@dataclass
class ServiceConfig:
    bind_host: str = "127.0.0.1"
    bind_port: int = 8000
    storage_path: Optional[str] = None
    threshold_path: Optional[str] = None
    catalog_path: Optional[str] = None
    admin_token: str = "admin-token"


def load_service_config(path=None, env: Optional[dict] = None) -> ServiceConfig:
    """Read the service config file, then apply same-name env overrides."""
    values: dict = {}
    if path is not None:
        try:
            values = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read service config {path}: {exc}") from exc
    env = os.environ if env is None else env
    cfg = ServiceConfig()
    for name in ("bind_host", "bind_port", "storage_path", "threshold_path", "catalog_path", "admin_token"):
        if name in values:
            setattr(cfg, name, values[name])
        if name.upper() in env:
            setattr(cfg, name, env[name.upper()])
    cfg.bind_port = int(cfg.bind_port)
    return cfg


def build_engine(config: ServiceConfig) -> TutorEngine:
    thresholds = (
        load_threshold_config(config.threshold_path) if config.threshold_path else ThresholdConfig()
    )
    catalog = load_feedback_catalog(config.catalog_path)
    store = JsonlStore(config.storage_path) if config.storage_path else None
    return TutorEngine(course=None, thresholds=thresholds, catalog=catalog, store=store)


class _Accounts:
    def __init__(self, admin_token: str):
        self._lock = threading.Lock()
        self._tokens: Dict[str, dict] = {admin_token: {"role": "admin", "learner_id": None}}

    def register_learner(self, token: str, learner_id: str) -> None:
        with self._lock:
            existing = self._tokens.get(token)
            if existing and existing["learner_id"] != learner_id:
                raise ValidationError("token already assigned to another account")
            self._tokens[token] = {"role": "learner", "learner_id": learner_id}

    def resolve(self, token: Optional[str]) -> dict:
        with self._lock:
            account = self._tokens.get(token or "")
        if account is None:
            raise AuthError("missing or unknown bearer token")
        return account


def create_app(
    engine: TutorEngine,
    admin_token: str = "admin-token",
    analyzer_workers: int = DEFAULT_ANALYZER_WORKERS,
) -> FastAPI:
    app = FastAPI(title="affective-tutor", docs_url=None, redoc_url=None)
    accounts = _Accounts(admin_token)
    analyzer_slots = threading.Semaphore(analyzer_workers)
    app.state.engine = engine
    app.state.accounts = accounts

    @app.exception_handler(TutorError)
    def _tutor_error(request: Request, exc: TutorError):
        body = {"ok": False, "error": {"code": exc.code, "message": exc.message}}
        if isinstance(exc, FrameValidationError):
            body["error"]["frame_index"] = exc.frame_index
        return JSONResponse(status_code=_status_for(exc), content=body)

    def _token(authorization: Optional[str] = Header(default=None)) -> Optional[str]:
        if authorization and authorization.startswith("Bearer "):
            return authorization[len("Bearer "):]
        return None

    def require_admin(token: Optional[str] = Depends(_token)) -> dict:
        account = accounts.resolve(token)
        if account["role"] != "admin":
            raise AccessError("admin role required")
        return account

    def require_learner(token: Optional[str] = Depends(_token)) -> dict:
        account = accounts.resolve(token)
        if account["role"] != "learner":
            raise AccessError("learner role required")
        return account

    # --- admin ----------------------------------------------------------------

    @app.post("/api/admin/courses")
    def define_course(body: dict = Body(...), _: dict = Depends(require_admin)):
        course = course_from_dict(body)
        engine.define_course(course)
        return {"ok": True, "course_id": course.course_id, "sessions": len(course.sessions)}

    @app.post("/api/admin/learners")
    def enroll_learner(body: dict = Body(...), _: dict = Depends(require_admin)):
        try:
            learner_id = str(body["learner_id"])
            style = str(body["style"])
            token = str(body["token"])
        except KeyError as exc:
            raise ValidationError(f"missing field {exc}") from exc
        engine.enroll_learner(learner_id, style)
        accounts.register_learner(token, learner_id)
        return {"ok": True, "learner_id": learner_id}

    @app.get("/api/admin/reports/{learner_id}")
    def learner_report(learner_id: str, _: dict = Depends(require_admin)):
        report = engine.learner_report(learner_id)
        return {
            "ok": True,
            "report": report,
            "text": render_learner_report_text(report),
            "csv": render_learner_report_csv(report),
        }

    # --- learner --------------------------------------------------------------

    @app.get("/api/sessions")
    def sessions(account: dict = Depends(require_learner)):
        return {"ok": True, "sessions": engine.accessible_sessions(account["learner_id"])}

    @app.get("/api/sessions/{session_id}/lessons")
    def lessons(session_id: str, account: dict = Depends(require_learner)):
        learner_id = account["learner_id"]
        payload = [
            {
                "id": lesson.lesson_id,
                "title": lesson.title,
                "content": lesson.content_ref,
                "supplementary": engine.visible_supplementary(learner_id, lesson.lesson_id),
            }
            for lesson in engine.lessons_for(learner_id, session_id)
        ]
        return {"ok": True, "lessons": payload}

    @app.post("/api/clips")
    def ingest_clip(body: dict = Body(...), account: dict = Depends(require_learner)):
        clip = clip_from_dict(body)
        if clip.learner_id != account["learner_id"]:
            raise AccessError("clip learner_id does not match the authenticated learner")
        with analyzer_slots:
            result, ack = engine.ingest_clip(clip)
        return {
            "ok": True,
            "clip_state": result.state.value,
            "warnings": list(result.warnings),
            "duplicate": ack["duplicate"],
        }

    @app.post("/api/lessons/{lesson_id}/complete")
    def complete_lesson(lesson_id: str, account: dict = Depends(require_learner)):
        outcome = engine.complete_lesson(account["learner_id"], lesson_id)
        return {
            "ok": True,
            "lesson_state": outcome["state"],
            "message": outcome["message"],
            "supplementary": outcome["supplementary"],
        }

    @app.get("/api/sessions/{session_id}/test")
    def get_test(session_id: str, account: dict = Depends(require_learner)):
        test = engine.get_test(account["learner_id"], session_id)
        # answer keys must never reach a learner
        questions = [{"text": q.text, "options": list(q.options)} for q in test.questions]
        return {"ok": True, "questions": questions, "passing_score": test.passing_score}

    @app.post("/api/sessions/{session_id}/test")
    def submit_test(session_id: str, body: dict = Body(...), account: dict = Depends(require_learner)):
        answers = body.get("answers")
        if not isinstance(answers, list):
            raise ValidationError("body must contain an 'answers' list")
        result = engine.submit_test_attempt(account["learner_id"], session_id, answers)
        return {"ok": True, **result}

    return app


def main(config_path: Optional[str] = None) -> None:
    import uvicorn

    config = load_service_config(config_path)
    engine = build_engine(config)
    app = create_app(engine, admin_token=config.admin_token)
    uvicorn.run(app, host=config.bind_host, port=config.bind_port)
