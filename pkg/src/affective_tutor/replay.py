"""Replay of recorded prediction streams through the engine.

A stream directory holds one folder per learner with clip manifests per
lesson, plus a plan.json describing styles, group labels, tokens, and
scripted test attempts. Replays are fully deterministic: the engine clock
is simulated and reports are rendered with sorted keys.
"""

from __future__ import annotations

import json
import random
from datetime import timedelta
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .aggregator import (
    LessonState,
    PRIORITY_ORDER,
    FeedbackCatalog,
    aggregate,
    load_feedback_catalog,
)
from .affect import AffectPoint, EmotionalState, classify_emotion
from .clips import ClipState, clip_from_dict, clip_to_dict
from .config import ThresholdConfig
from .course import CognitiveStyle, CourseModel, course_to_dict
from .engine import TutorEngine
from .errors import ValidationError
from .metrics import compute_course_metrics, render_histogram, render_metrics_csv, render_metrics_text
from .storage import MemoryStore
from .synth import SIM_EPOCH


def simulated_clock(start=SIM_EPOCH, step_seconds: float = 1.0):
    """Monotonic fake clock; each call advances by a fixed step."""
    state = {"n": 0}

    def tick() -> str:
        at = start + timedelta(seconds=state["n"] * step_seconds)
        state["n"] += 1
        return at.isoformat()

    return tick


# --- drivers -----------------------------------------------------------------

class EngineDriver:
    """Drives a TutorEngine in-process."""

    def __init__(self, engine: TutorEngine):
        self.engine = engine

    def define_course(self, course: CourseModel) -> None:
        self.engine.define_course(course)

    def enroll(self, learner_id: str, style: str, token: str) -> None:
        self.engine.enroll_learner(learner_id, style)

    def ingest(self, clip_dict: dict) -> dict:
        clip = clip_from_dict(clip_dict)
        result, ack = self.engine.ingest_clip(clip)
        return {"clip_state": result.state.value, "duplicate": ack["duplicate"]}

    def complete(self, learner_id: str, lesson_id: str) -> dict:
        outcome = self.engine.complete_lesson(learner_id, lesson_id)
        return {
            "lesson_state": outcome["state"],
            "message": outcome["message"],
            "supplementary": outcome["supplementary"],
        }

    def submit_test(self, learner_id: str, session_id: str, answers: List[int]) -> dict:
        return self.engine.submit_test_attempt(learner_id, session_id, answers)


class HttpDriver:
    """Drives a running service over HTTP with the same call surface."""

    def __init__(self, client, admin_token: str, learner_tokens: Dict[str, str]):
        self.client = client
        self.admin_token = admin_token
        self.learner_tokens = dict(learner_tokens)

    def _headers(self, token: str) -> dict:
        return {"Authorization": f"Bearer {token}"}

    def _check(self, response) -> dict:
        body = response.json()
        if not body.get("ok"):
            error = body.get("error", {})
            raise ValidationError(
                f"service call failed ({response.status_code}): "
                f"{error.get('code')}: {error.get('message')}"
            )
        return body

    def define_course(self, course: CourseModel) -> None:
        self._check(
            self.client.post(
                "/api/admin/courses",
                json=course_to_dict(course),
                headers=self._headers(self.admin_token),
            )
        )

    def enroll(self, learner_id: str, style: str, token: str) -> None:
        self.learner_tokens[learner_id] = token
        self._check(
            self.client.post(
                "/api/admin/learners",
                json={"learner_id": learner_id, "style": style, "token": token},
                headers=self._headers(self.admin_token),
            )
        )

    def ingest(self, clip_dict: dict) -> dict:
        token = self.learner_tokens[clip_dict["learner_id"]]
        return self._check(self.client.post("/api/clips", json=clip_dict, headers=self._headers(token)))

    def complete(self, learner_id: str, lesson_id: str) -> dict:
        body = self._check(
            self.client.post(
                f"/api/lessons/{lesson_id}/complete",
                headers=self._headers(self.learner_tokens[learner_id]),
            )
        )
        return {
            "lesson_state": body["lesson_state"],
            "message": body["message"],
            "supplementary": body["supplementary"],
        }

    def submit_test(self, learner_id: str, session_id: str, answers: List[int]) -> dict:
        return self._check(
            self.client.post(
                f"/api/sessions/{session_id}/test",
                json={"answers": answers},
                headers=self._headers(self.learner_tokens[learner_id]),
            )
        )


# --- replay ---------------------------------------------------------------------

def _answers_for(test, num_wrong: int) -> List[int]:
    """Answer key with the first `num_wrong` questions answered incorrectly."""
    answers = []
    for i, question in enumerate(test.questions):
        if i < num_wrong:
            answers.append((question.correct_index + 1) % 4)
        else:
            answers.append(question.correct_index)
    return answers


def load_plan(stream_dir) -> dict:
    path = Path(stream_dir) / "plan.json"
    if not path.exists():
        return {"learners": []}
    return json.loads(path.read_text(encoding="utf-8"))


def run_replay(
    stream_dir,
    course: CourseModel,
    thresholds: Optional[ThresholdConfig] = None,
    catalog: Optional[FeedbackCatalog] = None,
    driver=None,
    out_dir=None,
) -> dict:
    """Drive ingest -> complete -> test through the engine for every learner.

    Returns the report dict; when out_dir is given also writes report.json,
    report.txt, and metrics.csv.
    """
    stream_dir = Path(stream_dir)
    thresholds = thresholds or ThresholdConfig()
    catalog = catalog or load_feedback_catalog()
    if driver is None:
        engine = TutorEngine(
            course=course,
            thresholds=thresholds,
            catalog=catalog,
            store=MemoryStore(),
            clock=simulated_clock(),
        )
        driver = EngineDriver(engine)
    else:
        driver.define_course(course)

    plan = load_plan(stream_dir)
    learners = sorted(plan.get("learners", []), key=lambda l: l["learner_id"])

    # validate lesson references before touching the engine
    known_lessons = {lesson.lesson_id for _, _, lesson in course.iter_lessons()}
    unresolved = []
    for spec in learners:
        learner_dir = stream_dir / spec["learner_id"]
        if learner_dir.is_dir():
            for lesson_dir in learner_dir.iterdir():
                if lesson_dir.is_dir() and lesson_dir.name not in known_lessons:
                    unresolved.append(f"{spec['learner_id']}/{lesson_dir.name}")
    if unresolved:
        raise ValidationError(f"streams reference unknown lessons: {sorted(unresolved)}")

    report_learners: Dict[str, dict] = {}
    local_records: List[dict] = []
    grouping: Dict[str, List[str]] = {}

    for spec in learners:
        learner_id = spec["learner_id"]
        style = spec["style"]
        group = spec.get("group", "all")
        grouping.setdefault(group, []).append(learner_id)
        driver.enroll(learner_id, style, spec.get("token", f"token-{learner_id}"))

        record = {"learner_id": learner_id, "style": style, "clips": {}, "attempts": {}}
        entry: dict = {"style": style, "group": group, "lessons": [], "sessions": []}
        learner_dir = stream_dir / learner_id

        for session in course.sessions:
            style_group = session.groups[CognitiveStyle(style)]
            for lesson in style_group.lessons:
                lesson_dir = learner_dir / lesson.lesson_id
                if not lesson_dir.is_dir():
                    continue
                clip_states = []
                for clip_path in sorted(lesson_dir.glob("clip_*.json")):
                    clip_dict = json.loads(clip_path.read_text(encoding="utf-8"))
                    outcome = driver.ingest(clip_dict)
                    clip_states.append(outcome["clip_state"])
                    record["clips"].setdefault(lesson.lesson_id, []).append(
                        {
                            "result": {"clip_id": clip_dict["clip_id"], "state": outcome["clip_state"]},
                            "recorded_at": clip_dict["recorded_at"],
                            "duration_seconds": len(clip_dict["frames"]) / clip_dict["fps"],
                        }
                    )
                if not clip_states:
                    continue
                completion = driver.complete(learner_id, lesson.lesson_id)
                entry["lessons"].append(
                    {
                        "lesson_id": lesson.lesson_id,
                        "clip_states": clip_states,
                        "lesson_state": completion["lesson_state"],
                        "message": completion["message"],
                        "supplementary": completion["supplementary"],
                    }
                )

            scripts = spec.get("test_scripts", {}).get(session.session_id, [])
            attempts = []
            passed = False
            for attempt_spec in scripts:
                answers = attempt_spec.get("answers")
                if answers is None:
                    answers = _answers_for(style_group.test, int(attempt_spec.get("num_wrong", 0)))
                result = driver.submit_test(learner_id, session.session_id, answers)
                attempts.append({"score": result["score"], "passed": result["passed"]})
                record["attempts"].setdefault(session.session_id, []).append(
                    {"at": None, "answers": answers, "score": result["score"], "passed": result["passed"]}
                )
                if result["passed"]:
                    passed = True
                    break
            if attempts:
                entry["sessions"].append({"session_id": session.session_id, "attempts": attempts})
            if not passed:
                break  # next sessions stay locked

        report_learners[learner_id] = entry
        local_records.append(record)

    metrics = compute_course_metrics(local_records, grouping, course)
    report = {
        "course_id": course.course_id,
        "learners": report_learners,
        "metrics": metrics,
    }

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(
            json.dumps(report, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )
        (out_dir / "metrics.csv").write_text(render_metrics_csv(metrics), encoding="utf-8")
        (out_dir / "report.txt").write_text(render_report_text(report), encoding="utf-8")
    return report


def render_report_text(report: dict) -> str:
    lines = [f"Replay report for course {report['course_id']}", ""]
    for learner_id in sorted(report["learners"]):
        entry = report["learners"][learner_id]
        lines.append(f"Learner {learner_id} (style {entry['style']}, group {entry['group']})")
        for lesson in entry["lessons"]:
            lines.append(f"  Lesson {lesson['lesson_id']}: {lesson['lesson_state']}")
            counts: Dict[str, int] = {}
            for state in lesson["clip_states"]:
                counts[state] = counts.get(state, 0) + 1
            for bar in render_histogram(counts):
                lines.append(f"    {bar}")
            lines.append(f"    feedback: {lesson['message']}")
            if lesson["supplementary"]:
                lines.append(f"    supplementary: {', '.join(lesson['supplementary'])}")
        for session in entry["sessions"]:
            scores = ", ".join(
                f"{a['score']}{'*' if a['passed'] else ''}" for a in session["attempts"]
            )
            lines.append(f"  Test {session['session_id']}: {scores}")
        lines.append("")
    lines.append("Metrics")
    lines.append(render_metrics_text(report["metrics"]))
    return "\n".join(lines)


# --- independent oracles ---------------------------------------------------------

def oracle_classify(valence: float, arousal: float, cfg: ThresholdConfig) -> EmotionalState:
    """Rule-by-rule re-evaluation of the circumplex regions, written as an
    explicit predicate table rather than a decision chain."""
    def clamp(x):
        return max(-10.0, min(10.0, x))

    v = clamp(valence * cfg.emotion_multiplier)
    a = clamp(arousal * cfg.emotion_multiplier)
    rules = [
        (EmotionalState.TIRED, a <= cfg.alpha6),
        (EmotionalState.ENGAGED, v >= cfg.alpha2 and a >= cfg.alpha3),
        (EmotionalState.ENGAGED, a >= cfg.alpha5 and v > cfg.alpha4),
        (EmotionalState.CONFUSED, v <= cfg.alpha4 and a >= cfg.alpha3),
        (EmotionalState.DISENGAGED, v <= cfg.alpha4 and a <= cfg.alpha1),
        (EmotionalState.NEUTRAL, True),
    ]
    matches = [state for state, hit in rules if hit]
    return matches[0]


def oracle_aggregate(counts: Dict[ClipState, int], cfg: ThresholdConfig) -> LessonState:
    """All-predicates-then-first-true evaluation of the 21 lesson states."""
    t = cfg.aggregator_counts
    c = {state: counts.get(state, 0) for state in ClipState}
    predicates = [
        (
            LessonState.NO_FACE_PLUS_MULTIPLE_FACES,
            c[ClipState.NO_FACE] > t["no_face"] and c[ClipState.MULTIPLE_FACES] > t["multiple_faces"],
        ),
        (LessonState.MULTIPLE_FACES, c[ClipState.MULTIPLE_FACES] > t["multiple_faces"]),
        (LessonState.NUMEROUS_NO_FACES, c[ClipState.NO_FACE] > t["numerous_no_faces"]),
        (
            LessonState.TIRED_UNFOCUSED,
            c[ClipState.TIRED] > t["tired"] and c[ClipState.UNFOCUSED] > t["unfocused"],
        ),
        (
            LessonState.TIRED_CONFUSED,
            c[ClipState.TIRED] > t["tired"] and c[ClipState.CONFUSED] > t["confused"],
        ),
        (
            LessonState.UNFOCUSED_CONFUSED,
            c[ClipState.UNFOCUSED] > t["unfocused"] and c[ClipState.CONFUSED] > t["confused"],
        ),
        (
            LessonState.ENGAGED_TIRED,
            c[ClipState.ENGAGED] > t["engaged"] and c[ClipState.TIRED] > t["tired"],
        ),
        (
            LessonState.ENGAGED_CONFUSED,
            c[ClipState.ENGAGED] > t["engaged"] and c[ClipState.CONFUSED] > t["confused"],
        ),
        (
            LessonState.DISENGAGED_CONFUSED,
            c[ClipState.DISENGAGED] > t["disengaged"] and c[ClipState.CONFUSED] > t["confused"],
        ),
        (
            LessonState.TIRED_NO_FACE,
            c[ClipState.TIRED] > t["tired"] and c[ClipState.NO_FACE] > t["no_face"],
        ),
        (
            LessonState.TIRED_DISENGAGED,
            c[ClipState.TIRED] > t["tired"] and c[ClipState.DISENGAGED] > t["disengaged"],
        ),
        (
            LessonState.ENGAGED_NO_FACE,
            c[ClipState.ENGAGED] > t["engaged"] and c[ClipState.NO_FACE] > t["no_face"],
        ),
        (
            LessonState.DISENGAGED_NO_FACE,
            c[ClipState.DISENGAGED] > t["disengaged"] and c[ClipState.NO_FACE] > t["no_face"],
        ),
        (
            LessonState.ENGAGED_UNFOCUSED,
            c[ClipState.ENGAGED] > t["engaged"] and c[ClipState.UNFOCUSED] > t["unfocused"],
        ),
        (LessonState.NO_FACE, c[ClipState.NO_FACE] > t["no_face"]),
        (LessonState.UNFOCUSED, c[ClipState.UNFOCUSED] > t["unfocused"]),
        (LessonState.TIRED, c[ClipState.TIRED] > t["tired"]),
        (LessonState.ENGAGED, c[ClipState.ENGAGED] > t["engaged"]),
        (LessonState.CONFUSED, c[ClipState.CONFUSED] > t["confused"]),
        (LessonState.DISENGAGED, c[ClipState.DISENGAGED] > t["disengaged"]),
        (LessonState.NEUTRAL, True),
    ]
    return next(state for state, hit in predicates if hit)


def random_counts(rng: random.Random, max_count: int = 6) -> Dict[ClipState, int]:
    return {state: rng.randint(0, max_count) for state in ClipState}


def verify_against_oracle(trials: int, seed: int, cfg: Optional[ThresholdConfig] = None) -> dict:
    """Cross-check the aggregator and the circumplex classifier against the
    independently written oracles; any mismatch is reported, not raised."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    cfg = cfg or ThresholdConfig()
    rng = random.Random(seed)

    aggregator_mismatches = 0
    first_counterexample = None
    probes = [{ClipState.DISENGAGED: 1}]
    for i in range(trials):
        counts = probes[i] if i < len(probes) else random_counts(rng)
        expected = oracle_aggregate(counts, cfg)
        actual = aggregate(counts, cfg)
        if expected is not actual:
            aggregator_mismatches += 1
            if first_counterexample is None:
                first_counterexample = {
                    "counts": {s.value: n for s, n in counts.items()},
                    "oracle": expected.value,
                    "actual": actual.value,
                }

    grid_mismatches = 0
    grid_points = 0
    states = set()
    for vi in range(-100, 101):
        for ai in range(-100, 101):
            v, a = vi / 10.0, ai / 10.0
            actual = classify_emotion(AffectPoint(v, a), cfg)
            states.add(actual)
            grid_points += 1
            if oracle_classify(v, a, cfg) is not actual:
                grid_mismatches += 1

    return {
        "trials": trials,
        "aggregator_mismatches": aggregator_mismatches,
        "first_counterexample": first_counterexample,
        "grid_points": grid_points,
        "grid_mismatches": grid_mismatches,
        "grid_states_seen": sorted(s.value for s in states),
        "ok": aggregator_mismatches == 0 and grid_mismatches == 0,
    }
