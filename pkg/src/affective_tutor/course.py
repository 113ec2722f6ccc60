"""Course structure: sessions, per-style lesson groups, and tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ConfigError, NotFoundError, ValidationError

OPTIONS_PER_QUESTION = 4
DEFAULT_PASSING_SCORE = 80


class CognitiveStyle(str, Enum):
    WHOLISTIC = "wholistic"
    ANALYTICAL = "analytical"
    MIDDLE = "middle"


@dataclass(frozen=True)
class Question:
    text: str
    options: Tuple[str, str, str, str]
    correct_index: int

    def __post_init__(self):
        if len(self.options) != OPTIONS_PER_QUESTION:
            raise ConfigError(f"question needs exactly {OPTIONS_PER_QUESTION} options: {self.text!r}")
        if not (0 <= self.correct_index < OPTIONS_PER_QUESTION):
            raise ConfigError(f"correct_index out of range for question {self.text!r}")


@dataclass(frozen=True)
class Test:
    questions: Tuple[Question, ...]
    passing_score: int = DEFAULT_PASSING_SCORE

    def __post_init__(self):
        if not self.questions:
            raise ConfigError("a test needs at least one question")
        if not (0 <= self.passing_score <= 100):
            raise ConfigError("passing_score must be a percentage")


@dataclass(frozen=True)
class GradeResult:
    score: int
    passed: bool


def grade_test(answers: Sequence[int], test: Test) -> GradeResult:
    """Score a submission as an integer percent (rounded half-up)."""
    if len(answers) != len(test.questions):
        raise ValidationError(
            f"expected {len(test.questions)} answers, got {len(answers)}"
        )
    for i, answer in enumerate(answers):
        if not isinstance(answer, int) or not (0 <= answer < OPTIONS_PER_QUESTION):
            raise ValidationError(f"answer {i} out of range: {answer!r}")
    correct = sum(1 for a, q in zip(answers, test.questions) if a == q.correct_index)
    total = len(test.questions)
    score = (200 * correct + total) // (2 * total)  # integer half-up rounding
    return GradeResult(score=score, passed=score >= test.passing_score)


@dataclass(frozen=True)
class Lesson:
    lesson_id: str
    title: str
    content_ref: str
    supplementary: Tuple[str, ...] = ()


@dataclass(frozen=True)
class StyleGroup:
    lessons: Tuple[Lesson, ...]
    test: Test


@dataclass(frozen=True)
class Session:
    session_id: str
    title: str
    groups: Dict[CognitiveStyle, StyleGroup]

    def __post_init__(self):
        missing = [s.value for s in CognitiveStyle if s not in self.groups]
        if missing:
            raise ConfigError(
                f"session {self.session_id!r} missing cognitive style groups: {missing}"
            )


@dataclass(frozen=True)
class CourseModel:
    course_id: str
    title: str
    sessions: Tuple[Session, ...]

    def __post_init__(self):
        if not self.sessions:
            raise ConfigError("a course needs at least one session")
        seen = set()
        for session in self.sessions:
            if session.session_id in seen:
                raise ConfigError(f"duplicate session id {session.session_id!r}")
            seen.add(session.session_id)
        lesson_ids = set()
        for _, _, lesson in self.iter_lessons():
            if lesson.lesson_id in lesson_ids:
                raise ConfigError(f"duplicate lesson id {lesson.lesson_id!r}")
            lesson_ids.add(lesson.lesson_id)

    def iter_lessons(self):
        for session in self.sessions:
            for style, group in session.groups.items():
                for lesson in group.lessons:
                    yield session, style, lesson

    def session_index(self, session_id: str) -> int:
        for i, session in enumerate(self.sessions):
            if session.session_id == session_id:
                return i
        raise NotFoundError(f"unknown session {session_id!r}")

    def get_session(self, session_id: str) -> Session:
        return self.sessions[self.session_index(session_id)]

    def find_lesson(self, lesson_id: str) -> Tuple[Session, CognitiveStyle, Lesson]:
        for session, style, lesson in self.iter_lessons():
            if lesson.lesson_id == lesson_id:
                return session, style, lesson
        raise NotFoundError(f"unknown lesson {lesson_id!r}")


# --- fixture format ----------------------------------------------------------

def _question_from_dict(raw: dict) -> Question:
    try:
        return Question(
            text=str(raw["text"]),
            options=tuple(str(o) for o in raw["options"]),
            correct_index=int(raw["correct_index"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad question record {raw!r}: {exc}") from exc


def _lesson_from_dict(raw: dict) -> Lesson:
    try:
        return Lesson(
            lesson_id=str(raw["id"]),
            title=str(raw["title"]),
            content_ref=str(raw["content"]),
            supplementary=tuple(str(s) for s in raw.get("supplementary", [])),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad lesson record {raw!r}: {exc}") from exc


def course_from_dict(raw: dict) -> CourseModel:
    """Build and validate a CourseModel from its fixture document."""
    if not isinstance(raw, dict):
        raise ConfigError("course fixture must be a JSON object")
    try:
        sessions = []
        for s in raw["sessions"]:
            groups: Dict[CognitiveStyle, StyleGroup] = {}
            for style_name, group in s.get("groups", {}).items():
                style = CognitiveStyle(style_name)
                test_raw = group["test"]
                groups[style] = StyleGroup(
                    lessons=tuple(_lesson_from_dict(l) for l in group["lessons"]),
                    test=Test(
                        questions=tuple(_question_from_dict(q) for q in test_raw["questions"]),
                        passing_score=int(test_raw.get("passing_score", DEFAULT_PASSING_SCORE)),
                    ),
                )
            sessions.append(
                Session(session_id=str(s["id"]), title=str(s.get("title", s["id"])), groups=groups)
            )
        return CourseModel(
            course_id=str(raw["course_id"]),
            title=str(raw.get("title", raw["course_id"])),
            sessions=tuple(sessions),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad course fixture: {exc}") from exc


def course_to_dict(course: CourseModel) -> dict:
    return {
        "course_id": course.course_id,
        "title": course.title,
        "sessions": [
            {
                "id": session.session_id,
                "title": session.title,
                "groups": {
                    style.value: {
                        "lessons": [
                            {
                                "id": lesson.lesson_id,
                                "title": lesson.title,
                                "content": lesson.content_ref,
                                "supplementary": list(lesson.supplementary),
                            }
                            for lesson in group.lessons
                        ],
                        "test": {
                            "passing_score": group.test.passing_score,
                            "questions": [
                                {
                                    "text": q.text,
                                    "options": list(q.options),
                                    "correct_index": q.correct_index,
                                }
                                for q in group.test.questions
                            ],
                        },
                    }
                    for style, group in session.groups.items()
                },
            }
            for session in course.sessions
        ],
    }


def load_course_fixture(path) -> CourseModel:
    import json
    from pathlib import Path

    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read course fixture {path}: {exc}") from exc
    return course_from_dict(raw)


def default_course_fixture_path() -> str:
    from importlib import resources

    return str(resources.files("affective_tutor.data").joinpath("course_ai_for_everyone.json"))
