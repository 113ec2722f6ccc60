"""Circumplex emotion classification and head-pose focus gating.

Everything here is pure and stateless: values in, a decision out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List

from .config import ThresholdConfig
from .errors import ValidationError

AFFECT_MIN = -10.0
AFFECT_MAX = 10.0


class EmotionalState(str, Enum):
    ENGAGED = "Engaged"
    TIRED = "Tired"
    CONFUSED = "Confused"
    DISENGAGED = "Disengaged"
    NEUTRAL = "Neutral"


def _clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


@dataclass(frozen=True)
class AffectPoint:
    """A (valence, arousal) reading on the -10..10 affect scale.

    Slightly out-of-range values are clamped (numeric noise from upstream
    predictors); non-finite values are rejected.
    """

    valence: float
    arousal: float

    def __post_init__(self):
        if not (math.isfinite(self.valence) and math.isfinite(self.arousal)):
            raise ValidationError("affect point components must be finite")
        object.__setattr__(self, "valence", _clamp(self.valence, AFFECT_MIN, AFFECT_MAX))
        object.__setattr__(self, "arousal", _clamp(self.arousal, AFFECT_MIN, AFFECT_MAX))


@dataclass(frozen=True)
class HeadPose:
    """Euler angles (degrees) of the head relative to the camera."""

    yaw: float
    pitch: float
    roll: float = 0.0

    def __post_init__(self):
        for name in ("yaw", "pitch", "roll"):
            angle = getattr(self, name)
            if not math.isfinite(angle) or not (-180.0 <= angle <= 180.0):
                raise ValidationError(f"{name} must be a finite angle in [-180, 180]")


def classify_emotion(point: AffectPoint, cfg: ThresholdConfig) -> EmotionalState:
    """Map an affect point to one of five emotional states.

    The multiplier is applied to both axes before clamping back to the
    affect scale. Rules are evaluated in order and the first match wins;
    all boundary comparisons are inclusive toward the named state.
    """
    v = _clamp(point.valence * cfg.emotion_multiplier, AFFECT_MIN, AFFECT_MAX)
    a = _clamp(point.arousal * cfg.emotion_multiplier, AFFECT_MIN, AFFECT_MAX)

    if a <= cfg.alpha6:
        return EmotionalState.TIRED
    if v >= cfg.alpha2 and a >= cfg.alpha3:
        return EmotionalState.ENGAGED
    if a >= cfg.alpha5 and v > cfg.alpha4:
        return EmotionalState.ENGAGED
    if v <= cfg.alpha4 and a >= cfg.alpha3:
        return EmotionalState.CONFUSED
    if v <= cfg.alpha4 and a <= cfg.alpha1:
        return EmotionalState.DISENGAGED
    return EmotionalState.NEUTRAL


def is_focused(pose: HeadPose, cfg: ThresholdConfig) -> bool:
    """True when yaw and pitch both fall inside their focus windows (inclusive)."""
    yaw_lo, yaw_hi = cfg.yaw_focus_range
    pitch_lo, pitch_hi = cfg.pitch_focus_range
    return yaw_lo <= pose.yaw <= yaw_hi and pitch_lo <= pose.pitch <= pitch_hi


def mean_affect(points: Iterable[AffectPoint]) -> AffectPoint:
    """Componentwise arithmetic mean of a nonempty collection of affect points."""
    pts: List[AffectPoint] = list(points)
    if not pts:
        raise ValidationError("mean_affect requires at least one point")
    n = len(pts)
    return AffectPoint(
        sum(p.valence for p in pts) / n,
        sum(p.arousal for p in pts) / n,
    )
