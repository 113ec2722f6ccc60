"""The tutoring engine: learner records, routing, aggregation, tests, gating.

State lives in JSON-serializable learner records. Every mutation is applied
in memory and mirrored to the store as an event, so an engine rebuilt from
the same store reproduces identical records. Per-learner writes are
serialized with one lock per learner; reads return snapshots.
"""

from __future__ import annotations

import copy
import threading
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional

from .aggregator import (
    FeedbackCatalog,
    LessonState,
    aggregate,
    counts_from_states,
    select_feedback,
)
from .clips import (
    ClipObservation,
    ClipResult,
    ClipState,
    analyze_clip,
    clip_result_from_dict,
    clip_result_to_dict,
)
from .config import ThresholdConfig
from .course import CognitiveStyle, CourseModel, course_from_dict, course_to_dict, grade_test
from .errors import AccessError, NoDataError, NotFoundError, ValidationError
from .storage import MemoryStore

_LEARNER_PREFIX = "learner/"


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _parse_ts(value: str) -> datetime:
    return datetime.fromisoformat(value.replace("Z", "+00:00"))


def lesson_watch_seconds(entries: List[dict]) -> float:
    """Watch time for one lesson, derived from its clip log.

    With timestamps: span from first to last recording plus the last clip's
    length. Without: sum of clip durations (nominal 10 s when unknown).
    """
    if not entries:
        return 0.0
    if all(e.get("recorded_at") for e in entries):
        ordered = sorted(entries, key=lambda e: _parse_ts(e["recorded_at"]))
        span = (
            _parse_ts(ordered[-1]["recorded_at"]) - _parse_ts(ordered[0]["recorded_at"])
        ).total_seconds()
        return span + float(ordered[-1].get("duration_seconds", 10.0))
    return sum(float(e.get("duration_seconds", 10.0)) for e in entries)


class TutorEngine:
    def __init__(
        self,
        course: Optional[CourseModel],
        thresholds: ThresholdConfig,
        catalog: FeedbackCatalog,
        store: Optional[MemoryStore] = None,
        clock: Optional[Callable[[], str]] = None,
    ):
        self.thresholds = thresholds
        self.catalog = catalog
        self.store = store if store is not None else MemoryStore()
        self.clock = clock or _utc_now
        self._records: Dict[str, dict] = {}
        self._locks: Dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

        stored_course = self.store.get("course")
        if course is not None:
            self.course: Optional[CourseModel] = course
            self.store.put("course", course_to_dict(course))
        elif stored_course is not None:
            self.course = course_from_dict(stored_course)
        else:
            self.course = None

        for key in self.store.stream_keys():
            if key.startswith(_LEARNER_PREFIX):
                for event in self.store.stream(key):
                    self._apply(event)

    # --- plumbing -----------------------------------------------------------

    def _lock(self, learner_id: str) -> threading.Lock:
        with self._locks_guard:
            if learner_id not in self._locks:
                self._locks[learner_id] = threading.Lock()
            return self._locks[learner_id]

    def _emit(self, learner_id: str, event: dict) -> None:
        self._apply(event)
        self.store.append(_LEARNER_PREFIX + learner_id, event)

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        learner_id = event["learner_id"]
        if kind == "enroll":
            self._records.setdefault(
                learner_id,
                {
                    "learner_id": learner_id,
                    "style": event["style"],
                    "clips": {},
                    "outcomes": {},
                    "attempts": {},
                    "revealed": {},
                },
            )
        else:
            record = self._records[learner_id]
            if kind == "clip":
                record["clips"].setdefault(event["lesson_id"], []).append(event["entry"])
            elif kind == "outcome":
                record["outcomes"].setdefault(event["lesson_id"], []).append(event["outcome"])
            elif kind == "attempt":
                record["attempts"].setdefault(event["session_id"], []).append(event["attempt"])
            elif kind == "reveal":
                revealed = record["revealed"].setdefault(event["lesson_id"], [])
                for ref in event["refs"]:
                    if ref not in revealed:
                        revealed.append(ref)
            else:
                raise ValueError(f"unknown event kind {kind!r}")

    def _record(self, learner_id: str) -> dict:
        try:
            return self._records[learner_id]
        except KeyError:
            raise NotFoundError(f"unknown learner {learner_id!r}") from None

    def _require_course(self) -> CourseModel:
        if self.course is None:
            raise NotFoundError("no course defined")
        return self.course

    # --- admin --------------------------------------------------------------

    def define_course(self, course: CourseModel) -> None:
        self.course = course
        self.store.put("course", course_to_dict(course))

    def enroll_learner(self, learner_id: str, style) -> None:
        style = CognitiveStyle(style)
        existing = self._records.get(learner_id)
        if existing is not None:
            if existing["style"] != style.value:
                raise ValidationError(
                    f"learner {learner_id!r} already enrolled with style {existing['style']}"
                )
            return
        self._emit(learner_id, {"event": "enroll", "learner_id": learner_id, "style": style.value})

    # --- session gating and routing ------------------------------------------

    def accessible_sessions(self, learner_id: str) -> List[str]:
        """Contiguous prefix of sessions ending at the first un-passed one."""
        record = self._record(learner_id)
        course = self._require_course()
        accessible = []
        for session in course.sessions:
            accessible.append(session.session_id)
            attempts = record["attempts"].get(session.session_id, [])
            if not any(a["passed"] for a in attempts):
                break
        return accessible

    def _check_session_unlocked(self, learner_id: str, session_id: str) -> None:
        course = self._require_course()
        course.session_index(session_id)  # not-found check first
        if session_id not in self.accessible_sessions(learner_id):
            raise AccessError(f"session {session_id!r} is locked for learner {learner_id!r}")

    def _style_group(self, learner_id: str, session_id: str):
        record = self._record(learner_id)
        session = self._require_course().get_session(session_id)
        return session.groups[CognitiveStyle(record["style"])]

    def lessons_for(self, learner_id: str, session_id: str):
        """The unlocked session's lesson list for the learner's own style group."""
        self._check_session_unlocked(learner_id, session_id)
        return list(self._style_group(learner_id, session_id).lessons)

    def visible_supplementary(self, learner_id: str, lesson_id: str) -> List[str]:
        record = self._record(learner_id)
        return list(record["revealed"].get(lesson_id, []))

    def _check_lesson_access(self, learner_id: str, lesson_id: str):
        record = self._record(learner_id)
        session, style, lesson = self._require_course().find_lesson(lesson_id)
        if style.value != record["style"]:
            raise AccessError(
                f"lesson {lesson_id!r} belongs to the {style.value} group, "
                f"not to learner {learner_id!r}"
            )
        self._check_session_unlocked(learner_id, session.session_id)
        return session, lesson

    # --- clip flow ------------------------------------------------------------

    def record_clip_result(
        self,
        learner_id: str,
        lesson_id: str,
        result: ClipResult,
        recorded_at: Optional[str] = None,
        duration_seconds: Optional[float] = None,
    ) -> dict:
        """Append a clip result to the learner's lesson log; idempotent on clip_id."""
        with self._lock(learner_id):
            self._check_lesson_access(learner_id, lesson_id)
            record = self._record(learner_id)
            log = record["clips"].get(lesson_id, [])
            if any(e["result"]["clip_id"] == result.clip_id for e in log):
                return {"stored": True, "duplicate": True, "clip_id": result.clip_id}
            entry = {
                "result": clip_result_to_dict(result),
                "recorded_at": recorded_at,
                "duration_seconds": duration_seconds if duration_seconds is not None else 10.0,
            }
            self._emit(
                learner_id,
                {"event": "clip", "learner_id": learner_id, "lesson_id": lesson_id, "entry": entry},
            )
            return {"stored": True, "duplicate": False, "clip_id": result.clip_id}

    def ingest_clip(self, clip: ClipObservation, strict: bool = True):
        """Analyze a clip and persist its result before returning."""
        # access checks before the (comparatively) expensive analysis
        with self._lock(clip.learner_id):
            self._check_lesson_access(clip.learner_id, clip.lesson_id)
        result = analyze_clip(clip, self.thresholds, strict=strict)
        ack = self.record_clip_result(
            clip.learner_id,
            clip.lesson_id,
            result,
            recorded_at=clip.recorded_at,
            duration_seconds=clip.duration_seconds,
        )
        return result, ack

    def complete_lesson(self, learner_id: str, lesson_id: str) -> dict:
        """Aggregate the lesson's stored clip states into an outcome.

        Pure over the stored clip log: re-completion recomputes from the full
        log. A confusion outcome reveals the lesson's supplementary content.
        """
        with self._lock(learner_id):
            session, lesson = self._check_lesson_access(learner_id, lesson_id)
            record = self._record(learner_id)
            log = record["clips"].get(lesson_id, [])
            if not log:
                raise NoDataError(
                    f"no clips recorded for lesson {lesson_id!r}; cannot compute a state"
                )
            counts = counts_from_states(ClipState(e["result"]["state"]) for e in log)
            state = aggregate(counts, self.thresholds)
            feedback = select_feedback(state, bool(lesson.supplementary), self.catalog)
            if feedback.recommend_supplementary:
                self._emit(
                    learner_id,
                    {
                        "event": "reveal",
                        "learner_id": learner_id,
                        "lesson_id": lesson_id,
                        "refs": list(lesson.supplementary),
                    },
                )
            outcome = {
                "lesson_id": lesson_id,
                "state": state.value,
                "message": feedback.message,
                "recommend_supplementary": feedback.recommend_supplementary,
                "supplementary": self.visible_supplementary(learner_id, lesson_id),
                "watch_seconds": lesson_watch_seconds(log),
                "completed_at": self.clock(),
            }
            self._emit(
                learner_id,
                {
                    "event": "outcome",
                    "learner_id": learner_id,
                    "lesson_id": lesson_id,
                    "outcome": outcome,
                },
            )
            return dict(outcome)

    # --- tests ----------------------------------------------------------------

    def get_test(self, learner_id: str, session_id: str):
        self._check_session_unlocked(learner_id, session_id)
        return self._style_group(learner_id, session_id).test

    def submit_test_attempt(self, learner_id: str, session_id: str, answers) -> dict:
        with self._lock(learner_id):
            self._check_session_unlocked(learner_id, session_id)
            group = self._style_group(learner_id, session_id)
            grade = grade_test(answers, group.test)
            attempt = {
                "at": self.clock(),
                "answers": list(answers),
                "score": grade.score,
                "passed": grade.passed,
            }
            self._emit(
                learner_id,
                {
                    "event": "attempt",
                    "learner_id": learner_id,
                    "session_id": session_id,
                    "attempt": attempt,
                },
            )
            course = self._require_course()
            index = course.session_index(session_id)
            next_unlocked = grade.passed and index + 1 < len(course.sessions)
            revealed: List[str] = []
            if not grade.passed:
                # failing the test reveals every supplementary of the session's
                # lessons in the learner's style group
                for lesson in group.lessons:
                    if lesson.supplementary:
                        self._emit(
                            learner_id,
                            {
                                "event": "reveal",
                                "learner_id": learner_id,
                                "lesson_id": lesson.lesson_id,
                                "refs": list(lesson.supplementary),
                            },
                        )
                        revealed.extend(lesson.supplementary)
            return {
                "score": grade.score,
                "passed": grade.passed,
                "next_session_unlocked": next_unlocked,
                "revealed_supplementary": revealed,
            }

    # --- reads ------------------------------------------------------------------

    def get_record(self, learner_id: str) -> dict:
        return copy.deepcopy(self._record(learner_id))

    def all_records(self) -> List[dict]:
        return [copy.deepcopy(self._records[k]) for k in sorted(self._records)]

    def learner_report(self, learner_id: str) -> dict:
        """Per-lesson clip-state histogram, latest state, and outcome history."""
        record = self.get_record(learner_id)
        lessons = []
        for lesson_id in sorted(set(record["clips"]) | set(record["outcomes"])):
            log = record["clips"].get(lesson_id, [])
            histogram = counts_from_states(ClipState(e["result"]["state"]) for e in log)
            outcomes = record["outcomes"].get(lesson_id, [])
            lessons.append(
                {
                    "lesson_id": lesson_id,
                    "clip_count": len(log),
                    "clip_state_histogram": {s.value: n for s, n in sorted(histogram.items())},
                    "lesson_state": outcomes[-1]["state"] if outcomes else None,
                    "outcomes": outcomes,
                    "watch_seconds": lesson_watch_seconds(log),
                }
            )
        return {
            "learner_id": learner_id,
            "style": record["style"],
            "lessons": lessons,
            "attempts": record["attempts"],
        }
