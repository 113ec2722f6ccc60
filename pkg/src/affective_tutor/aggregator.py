"""Lesson-level state aggregation and feedback selection.

A lesson produces one ClipState per 10-second clip. The aggregator turns
the clip-state counts into a single LessonState by scanning a fixed
priority list; an entry matches when every constituent clip state count
strictly exceeds its configured threshold. The matching state then picks
a feedback message from the catalog.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .clips import ClipState
from .config import ThresholdConfig
from .errors import ConfigError


class LessonState(str, Enum):
    # Definition order is the priority order, highest first.
    NO_FACE_PLUS_MULTIPLE_FACES = "NoFacePlusMultipleFaces"
    MULTIPLE_FACES = "MultipleFaces"
    NUMEROUS_NO_FACES = "NumerousNoFaces"
    TIRED_UNFOCUSED = "TiredUnfocused"
    TIRED_CONFUSED = "TiredConfused"
    UNFOCUSED_CONFUSED = "UnfocusedConfused"
    ENGAGED_TIRED = "EngagedTired"
    ENGAGED_CONFUSED = "EngagedConfused"
    DISENGAGED_CONFUSED = "DisengagedConfused"
    TIRED_NO_FACE = "TiredNoFace"
    TIRED_DISENGAGED = "TiredDisengaged"
    ENGAGED_NO_FACE = "EngagedNoFace"
    DISENGAGED_NO_FACE = "DisengagedNoFace"
    ENGAGED_UNFOCUSED = "EngagedUnfocused"
    NO_FACE = "NoFace"
    UNFOCUSED = "Unfocused"
    TIRED = "Tired"
    ENGAGED = "Engaged"
    CONFUSED = "Confused"
    DISENGAGED = "Disengaged"
    NEUTRAL = "Neutral"


PRIORITY_ORDER: Tuple[LessonState, ...] = tuple(LessonState)

# States whose feedback may recommend supplementary content.
CONFUSION_STATES = frozenset(
    {
        LessonState.UNFOCUSED_CONFUSED,
        LessonState.ENGAGED_CONFUSED,
        LessonState.DISENGAGED_CONFUSED,
        LessonState.CONFUSED,
    }
)

# Each entry: (clip state counted, threshold key in aggregator_counts).
# NumerousNoFaces counts NoFace clips against its own, higher threshold.
_REQUIREMENTS: Dict[LessonState, Tuple[Tuple[ClipState, str], ...]] = {
    LessonState.NO_FACE_PLUS_MULTIPLE_FACES: (
        (ClipState.NO_FACE, "no_face"),
        (ClipState.MULTIPLE_FACES, "multiple_faces"),
    ),
    LessonState.MULTIPLE_FACES: ((ClipState.MULTIPLE_FACES, "multiple_faces"),),
    LessonState.NUMEROUS_NO_FACES: ((ClipState.NO_FACE, "numerous_no_faces"),),
    LessonState.TIRED_UNFOCUSED: (
        (ClipState.TIRED, "tired"),
        (ClipState.UNFOCUSED, "unfocused"),
    ),
    LessonState.TIRED_CONFUSED: (
        (ClipState.TIRED, "tired"),
        (ClipState.CONFUSED, "confused"),
    ),
    LessonState.UNFOCUSED_CONFUSED: (
        (ClipState.UNFOCUSED, "unfocused"),
        (ClipState.CONFUSED, "confused"),
    ),
    LessonState.ENGAGED_TIRED: (
        (ClipState.ENGAGED, "engaged"),
        (ClipState.TIRED, "tired"),
    ),
    LessonState.ENGAGED_CONFUSED: (
        (ClipState.ENGAGED, "engaged"),
        (ClipState.CONFUSED, "confused"),
    ),
    LessonState.DISENGAGED_CONFUSED: (
        (ClipState.DISENGAGED, "disengaged"),
        (ClipState.CONFUSED, "confused"),
    ),
    LessonState.TIRED_NO_FACE: (
        (ClipState.TIRED, "tired"),
        (ClipState.NO_FACE, "no_face"),
    ),
    LessonState.TIRED_DISENGAGED: (
        (ClipState.TIRED, "tired"),
        (ClipState.DISENGAGED, "disengaged"),
    ),
    LessonState.ENGAGED_NO_FACE: (
        (ClipState.ENGAGED, "engaged"),
        (ClipState.NO_FACE, "no_face"),
    ),
    LessonState.DISENGAGED_NO_FACE: (
        (ClipState.DISENGAGED, "disengaged"),
        (ClipState.NO_FACE, "no_face"),
    ),
    LessonState.ENGAGED_UNFOCUSED: (
        (ClipState.ENGAGED, "engaged"),
        (ClipState.UNFOCUSED, "unfocused"),
    ),
    LessonState.NO_FACE: ((ClipState.NO_FACE, "no_face"),),
    LessonState.UNFOCUSED: ((ClipState.UNFOCUSED, "unfocused"),),
    LessonState.TIRED: ((ClipState.TIRED, "tired"),),
    LessonState.ENGAGED: ((ClipState.ENGAGED, "engaged"),),
    LessonState.CONFUSED: ((ClipState.CONFUSED, "confused"),),
    LessonState.DISENGAGED: ((ClipState.DISENGAGED, "disengaged"),),
    LessonState.NEUTRAL: (),
}

StateCounts = Mapping[ClipState, int]


def counts_from_states(states: Iterable[ClipState]) -> Dict[ClipState, int]:
    counts: Dict[ClipState, int] = {}
    for state in states:
        counts[state] = counts.get(state, 0) + 1
    return counts


def aggregate(counts: StateCounts, cfg: ThresholdConfig) -> LessonState:
    """Pick the first priority-list entry whose counts clear their thresholds.

    Total: the trailing Neutral entry has no requirements and always matches.
    """
    thresholds = cfg.aggregator_counts
    for state in PRIORITY_ORDER:
        if all(
            counts.get(clip_state, 0) > thresholds[key]
            for clip_state, key in _REQUIREMENTS[state]
        ):
            return state
    raise AssertionError("unreachable: Neutral matches unconditionally")


@dataclass(frozen=True)
class Feedback:
    message: str
    recommend_supplementary: bool


class FeedbackCatalog:
    """Message lookup keyed by (lesson state, variant).

    Completeness is enforced at load time: one plain message per state,
    plus a with_supplementary variant for each confusion state.
    """

    def __init__(self, messages: Mapping[Tuple[LessonState, str], str]):
        self._messages = dict(messages)
        missing = [s.value for s in LessonState if (s, "plain") not in self._messages]
        if missing:
            raise ConfigError(f"feedback catalog missing plain messages for: {missing}")
        missing = [
            s.value for s in CONFUSION_STATES if (s, "with_supplementary") not in self._messages
        ]
        if missing:
            raise ConfigError(f"feedback catalog missing supplementary variants for: {missing}")
        extra = [
            (s.value, v)
            for (s, v) in self._messages
            if v == "with_supplementary" and s not in CONFUSION_STATES
        ]
        if extra:
            raise ConfigError(f"supplementary variants only allowed for confusion states: {extra}")

    def message(self, state: LessonState, variant: str = "plain") -> str:
        return self._messages[(state, variant)]


def load_feedback_catalog(path: Optional[str] = None) -> FeedbackCatalog:
    """Load the catalog from a JSON records file; default ships in-package."""
    if path is None:
        text = resources.files("affective_tutor.data").joinpath("feedback_catalog.json").read_text(
            encoding="utf-8"
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"feedback catalog is not valid JSON: {exc}") from exc
    messages: Dict[Tuple[LessonState, str], str] = {}
    for record in records:
        try:
            state = LessonState(record["state"])
            variant = record["variant"]
            message = record["message"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad feedback catalog record {record!r}: {exc}") from exc
        if variant not in ("plain", "with_supplementary"):
            raise ConfigError(f"unknown feedback variant {variant!r}")
        if not isinstance(message, str) or not message:
            raise ConfigError(f"empty message for {state.value}/{variant}")
        if (state, variant) in messages:
            raise ConfigError(f"duplicate catalog entry {state.value}/{variant}")
        messages[(state, variant)] = message
    return FeedbackCatalog(messages)


def select_feedback(
    state: LessonState, lesson_has_supplementary: bool, catalog: FeedbackCatalog
) -> Feedback:
    """Pick the message for a lesson state; recommend extra content only for
    confusion states when the lesson actually has some."""
    recommend = state in CONFUSION_STATES and lesson_has_supplementary
    variant = "with_supplementary" if recommend else "plain"
    return Feedback(message=catalog.message(state, variant), recommend_supplementary=recommend)
