"""Synthetic prediction-stream generation for replay runs.

Profiles script a learner's presence, focus, and affect over a lesson;
the generator turns them into clip manifests on the standard 10 s record /
10 s pause cadence at 15 fps. Streams are a pure function of (profile,
seed): the per-clip RNG is reseeded from a stable string key.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .clips import ClipObservation, clip_from_dict, clip_to_dict, frame_from_dict
from .course import CognitiveStyle
from .errors import ValidationError

CLIP_SECONDS = 10.0
PAUSE_SECONDS = 10.0
FPS = 15
SIM_EPOCH = datetime(2024, 1, 1, 9, 0, 0, tzinfo=timezone.utc)


@dataclass(frozen=True)
class LearnerProfile:
    """Behavior script for one synthetic learner.

    `affect_path` is a piecewise-linear (valence, arousal) trajectory with
    waypoints spread evenly over each lesson; per-frame uniform jitter of
    `affect_jitter` is added on top.
    """

    learner_id: str
    style: CognitiveStyle
    no_face_prob: float = 0.0
    multi_face_prob: float = 0.0
    unfocused_prob: float = 0.0
    unfocused_yaw: float = 40.0
    focused_yaw_jitter: float = 8.0
    focused_pitch_jitter: float = 8.0
    affect_path: Tuple[Tuple[float, float], ...] = ((0.0, 0.0),)
    affect_jitter: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("no_face_prob", "multi_face_prob", "unfocused_prob"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ValidationError(f"{name} must be in [0, 1], got {p!r}")
        if self.no_face_prob + self.multi_face_prob > 1.0:
            raise ValidationError("no_face_prob + multi_face_prob must not exceed 1")
        if not self.affect_path:
            raise ValidationError("affect_path needs at least one waypoint")
        for v, a in self.affect_path:
            if not (-10.0 <= v <= 10.0 and -10.0 <= a <= 10.0):
                raise ValidationError(f"affect waypoint ({v}, {a}) outside [-10, 10]^2")
        if self.affect_jitter < 0:
            raise ValidationError("affect_jitter must be non-negative")


def profile_from_dict(raw: dict) -> LearnerProfile:
    try:
        return LearnerProfile(
            learner_id=str(raw["learner_id"]),
            style=CognitiveStyle(raw["style"]),
            no_face_prob=float(raw.get("no_face_prob", 0.0)),
            multi_face_prob=float(raw.get("multi_face_prob", 0.0)),
            unfocused_prob=float(raw.get("unfocused_prob", 0.0)),
            unfocused_yaw=float(raw.get("unfocused_yaw", 40.0)),
            focused_yaw_jitter=float(raw.get("focused_yaw_jitter", 8.0)),
            focused_pitch_jitter=float(raw.get("focused_pitch_jitter", 8.0)),
            affect_path=tuple(
                (float(v), float(a)) for v, a in raw.get("affect_path", [(0.0, 0.0)])
            ),
            affect_jitter=float(raw.get("affect_jitter", 0.5)),
            seed=int(raw.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad learner profile {raw!r}: {exc}") from exc


def _interp_path(path: Sequence[Tuple[float, float]], t: float) -> Tuple[float, float]:
    """Piecewise-linear interpolation over waypoints at t in [0, 1]."""
    if len(path) == 1:
        return path[0]
    t = min(max(t, 0.0), 1.0)
    scaled = t * (len(path) - 1)
    i = min(int(scaled), len(path) - 2)
    frac = scaled - i
    (v0, a0), (v1, a1) = path[i], path[i + 1]
    return v0 + (v1 - v0) * frac, a0 + (a1 - a0) * frac


def _clamp10(x: float) -> float:
    return -10.0 if x < -10.0 else 10.0 if x > 10.0 else x


def generate_clip(
    profile: LearnerProfile,
    lesson_id: str,
    clip_index: int,
    total_clips: int,
    start_at: datetime,
    fps: int = FPS,
) -> ClipObservation:
    rng = random.Random(f"{profile.seed}:{profile.learner_id}:{lesson_id}:{clip_index}")
    n_frames = int(CLIP_SECONDS * fps)
    frames = []
    for i in range(n_frames):
        # lesson-time position of this frame, for the affect trajectory
        t = (clip_index + i / n_frames) / max(total_clips, 1)
        roll = rng.random()
        if roll < profile.no_face_prob:
            frames.append({"frame": i, "faces": []})
            continue
        if roll < profile.no_face_prob + profile.multi_face_prob:
            frames.append(
                {
                    "frame": i,
                    "faces": [
                        {"box": [0.1, 0.1, 0.3, 0.3], "conf": 0.95},
                        {"box": [0.6, 0.2, 0.3, 0.3], "conf": 0.9},
                    ],
                }
            )
            continue
        if rng.random() < profile.unfocused_prob:
            yaw = profile.unfocused_yaw
            pitch = 0.0
        else:
            yaw = rng.uniform(-profile.focused_yaw_jitter, profile.focused_yaw_jitter)
            pitch = rng.uniform(-profile.focused_pitch_jitter, profile.focused_pitch_jitter)
        v, a = _interp_path(profile.affect_path, t)
        jitter = profile.affect_jitter
        frames.append(
            {
                "frame": i,
                "faces": [{"box": [0.35, 0.25, 0.3, 0.4], "conf": 0.95}],
                "pose": {"yaw": yaw, "pitch": pitch, "roll": 0.0},
                "affect": {
                    "valence": _clamp10(v + rng.uniform(-jitter, jitter)),
                    "arousal": _clamp10(a + rng.uniform(-jitter, jitter)),
                },
            }
        )
    manifest = {
        "clip_id": f"{profile.learner_id}-{lesson_id}-clip{clip_index:03d}",
        "learner_id": profile.learner_id,
        "lesson_id": lesson_id,
        "recorded_at": start_at.isoformat(),
        "fps": fps,
        "frames": frames,
    }
    return clip_from_dict(manifest)


def generate_lesson_clips(
    profile: LearnerProfile,
    lesson_id: str,
    clips_per_lesson: int,
    start_at: Optional[datetime] = None,
) -> List[ClipObservation]:
    """Clips for one lesson on the record/pause cadence, deterministic per seed."""
    if clips_per_lesson < 1:
        raise ValidationError("clips_per_lesson must be >= 1")
    start_at = start_at or SIM_EPOCH
    cadence = timedelta(seconds=CLIP_SECONDS + PAUSE_SECONDS)
    return [
        generate_clip(profile, lesson_id, k, clips_per_lesson, start_at + k * cadence)
        for k in range(clips_per_lesson)
    ]


def write_stream_files(
    profile: LearnerProfile,
    lesson_plan: Sequence[Tuple[str, int]],
    out_dir,
    start_at: Optional[datetime] = None,
) -> List[Path]:
    """Write clip manifests for a lesson plan of (lesson_id, clips) pairs.

    Layout: <out_dir>/<learner_id>/<lesson_id>/clip_###.json. Lessons are
    laid out back to back on the simulated clock.
    """
    out_dir = Path(out_dir)
    at = start_at or SIM_EPOCH
    cadence = timedelta(seconds=CLIP_SECONDS + PAUSE_SECONDS)
    written: List[Path] = []
    for lesson_id, n_clips in lesson_plan:
        clips = generate_lesson_clips(profile, lesson_id, n_clips, start_at=at)
        lesson_dir = out_dir / profile.learner_id / lesson_id
        lesson_dir.mkdir(parents=True, exist_ok=True)
        for k, clip in enumerate(clips):
            path = lesson_dir / f"clip_{k:03d}.json"
            path.write_text(
                json.dumps(clip_to_dict(clip), sort_keys=True, indent=1) + "\n", encoding="utf-8"
            )
            written.append(path)
        at = at + n_clips * cadence
    return written
