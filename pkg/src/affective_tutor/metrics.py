"""Course-level academic metrics and report rendering.

The metrics table mirrors the usual course-evaluation layout: one row per
learner group and session, with columns for mean watch time, mean attempts
to a passing score, mean passing score, and mean first/second attempt
scores.
"""

from __future__ import annotations

import csv
import io
import logging
from typing import Dict, List, Mapping, Optional

from .course import CourseModel
from .engine import lesson_watch_seconds
from .errors import ValidationError

logger = logging.getLogger(__name__)

METRIC_COLUMNS = (
    "mean_watch_minutes",
    "mean_attempts_to_pass",
    "mean_passing_score",
    "mean_first_attempt_score",
    "mean_second_attempt_score",
)

_COLUMN_TITLES = {
    "mean_watch_minutes": "Mean watch time (min)",
    "mean_attempts_to_pass": "Mean attempts to pass",
    "mean_passing_score": "Mean passing score (%)",
    "mean_first_attempt_score": "Mean first attempt (%)",
    "mean_second_attempt_score": "Mean second attempt (%)",
}


def _mean(values: List[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def _session_lesson_ids(course: CourseModel, session_id: str) -> set:
    session = course.get_session(session_id)
    return {l.lesson_id for group in session.groups.values() for l in group.lessons}


def compute_course_metrics(
    records: List[dict],
    grouping: Mapping[str, List[str]],
    course: CourseModel,
) -> dict:
    """Per-session, per-group means over the given learner records.

    `grouping` partitions learner ids into named groups; a learner may
    appear in exactly one group. Empty groups are omitted with a warning.
    """
    by_id = {r["learner_id"]: r for r in records}
    seen: Dict[str, str] = {}
    for group, learners in grouping.items():
        for learner_id in learners:
            if learner_id in seen:
                raise ValidationError(
                    f"learner {learner_id!r} assigned to both {seen[learner_id]!r} and {group!r}"
                )
            seen[learner_id] = group

    warnings: List[str] = []
    sessions = []
    for session in course.sessions:
        session_id = session.session_id
        lesson_ids = _session_lesson_ids(course, session_id)
        groups: Dict[str, dict] = {}
        for group in sorted(grouping):
            members = [by_id[l] for l in grouping[group] if l in by_id]
            if not members:
                warnings.append(f"group {group!r} is empty for session {session_id!r}; omitted")
                logger.warning("group %r has no learner records; omitted", group)
                continue
            watch, attempts_to_pass, passing, first, second = [], [], [], [], []
            for record in members:
                seconds = sum(
                    lesson_watch_seconds(log)
                    for lesson_id, log in record["clips"].items()
                    if lesson_id in lesson_ids
                )
                if seconds:
                    watch.append(seconds / 60.0)
                session_attempts = record["attempts"].get(session_id, [])
                if session_attempts:
                    first.append(session_attempts[0]["score"])
                    if len(session_attempts) >= 2:
                        second.append(session_attempts[1]["score"])
                    for i, attempt in enumerate(session_attempts):
                        if attempt["passed"]:
                            attempts_to_pass.append(i + 1)
                            passing.append(attempt["score"])
                            break
            groups[group] = {
                "mean_watch_minutes": _mean(watch),
                "mean_attempts_to_pass": _mean(attempts_to_pass),
                "mean_passing_score": _mean(passing),
                "mean_first_attempt_score": _mean(first),
                "mean_second_attempt_score": _mean(second),
            }
        sessions.append({"session_id": session_id, "groups": groups})
    return {"sessions": sessions, "warnings": warnings}


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.1f}"


def render_metrics_csv(metrics: dict) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["session", "group"] + [_COLUMN_TITLES[c] for c in METRIC_COLUMNS])
    for session in metrics["sessions"]:
        for group in sorted(session["groups"]):
            values = session["groups"][group]
            writer.writerow(
                [session["session_id"], group] + [_fmt(values[c]) for c in METRIC_COLUMNS]
            )
    return out.getvalue()


def render_metrics_text(metrics: dict) -> str:
    lines = []
    for session in metrics["sessions"]:
        lines.append(f"Session: {session['session_id']}")
        header = f"  {'group':<12}" + "".join(f"{_COLUMN_TITLES[c]:>26}" for c in METRIC_COLUMNS)
        lines.append(header)
        for group in sorted(session["groups"]):
            values = session["groups"][group]
            lines.append(
                f"  {group:<12}" + "".join(f"{_fmt(values[c]):>26}" for c in METRIC_COLUMNS)
            )
        lines.append("")
    return "\n".join(lines)


def render_histogram(counts: Mapping[str, int], cell: str = "#") -> List[str]:
    """Character-cell histogram lines for a clip-state count map."""
    width = max((len(k) for k in counts), default=0)
    return [f"{state:<{width}} {cell * count} ({count})" for state, count in sorted(counts.items())]


def render_learner_report_text(report: dict) -> str:
    lines = [f"Learner: {report['learner_id']} (style: {report['style']})"]
    for lesson in report["lessons"]:
        lines.append(f"  Lesson {lesson['lesson_id']}: state={lesson['lesson_state'] or '-'}")
        for bar in render_histogram(lesson["clip_state_histogram"]):
            lines.append(f"    {bar}")
    for session_id in sorted(report["attempts"]):
        scores = ", ".join(
            f"{a['score']}{'*' if a['passed'] else ''}" for a in report["attempts"][session_id]
        )
        lines.append(f"  Test {session_id}: {scores}")
    return "\n".join(lines) + "\n"


def render_learner_report_csv(report: dict) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["lesson_id", "lesson_state", "clip_count", "clip_state", "count"])
    for lesson in report["lessons"]:
        histogram = lesson["clip_state_histogram"] or {"": 0}
        for state, count in sorted(histogram.items()):
            writer.writerow(
                [lesson["lesson_id"], lesson["lesson_state"] or "", lesson["clip_count"], state, count]
            )
    return out.getvalue()
