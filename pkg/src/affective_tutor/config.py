"""Analyzer and aggregator threshold configuration.

All decision constants live here so the classification geometry and the
aggregation counts can be tuned from one config file without touching code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Tuple

from .errors import ConfigError

# Keys of the per-state aggregation count thresholds.
AGGREGATOR_KEYS = (
    "disengaged",
    "engaged",
    "tired",
    "confused",
    "multiple_faces",
    "no_face",
    "numerous_no_faces",
    "unfocused",
)

DEFAULT_AGGREGATOR_COUNTS: Mapping[str, int] = {
    "disengaged": 0,
    "engaged": 1,
    "tired": 2,
    "confused": 2,
    "multiple_faces": 2,
    "no_face": 2,
    "numerous_no_faces": 4,
    "unfocused": 2,
}


@dataclass(frozen=True)
class ThresholdConfig:
    """Every tunable constant of the frame/clip analyzer and the aggregator."""

    face_confidence_min: float = 0.7
    no_face_ratio_max: float = 0.25
    multi_face_ratio_max: float = 0.25
    unfocused_ratio_max: float = 0.35
    yaw_focus_range: Tuple[float, float] = (-29.0, 29.0)
    pitch_focus_range: Tuple[float, float] = (-37.0, 16.0)
    alpha1: float = -1.5
    alpha2: float = 1.0
    alpha3: float = 1.0
    alpha4: float = -2.0
    alpha5: float = 6.0
    alpha6: float = -5.0
    emotion_multiplier: float = 1.0
    aggregator_counts: Mapping[str, int] = field(
        default_factory=lambda: dict(DEFAULT_AGGREGATOR_COUNTS)
    )

    def __post_init__(self):
        for name in (
            "face_confidence_min",
            "no_face_ratio_max",
            "multi_face_ratio_max",
            "unfocused_ratio_max",
        ):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ConfigError(f"{name} must be in [0, 1], got {value!r}")
        for name in ("yaw_focus_range", "pitch_focus_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ConfigError(f"{name} must be a finite (low, high) pair")
        if self.emotion_multiplier <= 0:
            raise ConfigError("emotion_multiplier must be positive")
        if not (self.alpha6 < self.alpha1 < self.alpha3 <= self.alpha5):
            raise ConfigError("alpha values must satisfy alpha6 < alpha1 < alpha3 <= alpha5")
        if not (self.alpha4 < self.alpha2):
            raise ConfigError("alpha4 must be below alpha2")
        missing = [k for k in AGGREGATOR_KEYS if k not in self.aggregator_counts]
        if missing:
            raise ConfigError(f"aggregator_counts missing keys: {missing}")
        for key, count in self.aggregator_counts.items():
            if key not in AGGREGATOR_KEYS:
                raise ConfigError(f"unknown aggregator count key {key!r}")
            if not isinstance(count, int) or count < 0:
                raise ConfigError(f"aggregator count {key!r} must be a non-negative integer")


def load_threshold_config(path) -> ThresholdConfig:
    """Load a JSON threshold file; absent keys fall back to the defaults."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read threshold config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("threshold config must be a JSON object")

    kwargs = {}
    scalar_keys = {
        "face_confidence_min",
        "no_face_ratio_max",
        "multi_face_ratio_max",
        "unfocused_ratio_max",
        "alpha1",
        "alpha2",
        "alpha3",
        "alpha4",
        "alpha5",
        "alpha6",
        "emotion_multiplier",
    }
    for key, value in raw.items():
        if key in scalar_keys:
            kwargs[key] = float(value)
        elif key in ("yaw_focus_range", "pitch_focus_range"):
            if not (isinstance(value, (list, tuple)) and len(value) == 2):
                raise ConfigError(f"{key} must be a [low, high] pair")
            kwargs[key] = (float(value[0]), float(value[1]))
        elif key == "aggregator_counts":
            counts = dict(DEFAULT_AGGREGATOR_COUNTS)
            counts.update({k: int(v) for k, v in value.items()})
            kwargs[key] = counts
        else:
            raise ConfigError(f"unknown threshold config key {key!r}")
    return ThresholdConfig(**kwargs)
