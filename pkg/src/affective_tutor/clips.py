"""Per-frame labeling and 10-second clip analysis.

A clip is a short burst of per-frame predictions (face boxes, head pose,
affect point). The analyzer reduces it to a single ClipState by applying
the presence, focus, and emotion gates in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .affect import AffectPoint, HeadPose, classify_emotion, is_focused, mean_affect
from .config import ThresholdConfig
from .errors import FrameValidationError, ValidationError

NOMINAL_CLIP_SECONDS = 10.0


class ClipState(str, Enum):
    NO_FACE = "NoFace"
    MULTIPLE_FACES = "MultipleFaces"
    UNFOCUSED = "Unfocused"
    ENGAGED = "Engaged"
    TIRED = "Tired"
    CONFUSED = "Confused"
    DISENGAGED = "Disengaged"
    NEUTRAL = "Neutral"


class FrameLabel(str, Enum):
    NO_FACE = "NoFace"
    MULTIPLE_FACES = "MultipleFaces"
    UNFOCUSED = "Unfocused"
    FOCUSED = "Focused"
    DROPPED = "Dropped"  # lenient mode only


@dataclass(frozen=True)
class FaceDetection:
    """Normalized face box plus detector confidence."""

    box: Tuple[float, float, float, float]
    confidence: float

    def __post_init__(self):
        x, y, w, h = self.box
        eps = 1e-9
        if not all(math.isfinite(v) for v in self.box):
            raise ValidationError("face box coordinates must be finite")
        if x < -eps or y < -eps or w < -eps or h < -eps or x + w > 1 + eps or y + h > 1 + eps:
            raise ValidationError(f"face box {self.box} outside the unit square")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"face confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class FramePrediction:
    frame_index: int
    faces: Tuple[FaceDetection, ...]
    pose: Optional[HeadPose] = None
    affect: Optional[AffectPoint] = None

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValidationError("frame_index must be >= 0")


@dataclass(frozen=True)
class ClipObservation:
    clip_id: str
    learner_id: str
    lesson_id: str
    recorded_at: str  # ISO-8601 UTC
    fps: float
    frames: Tuple[FramePrediction, ...]

    def __post_init__(self):
        if not self.frames:
            raise ValidationError("clip must contain at least one frame")
        if self.fps <= 0:
            raise ValidationError("fps must be positive")
        indices = [f.frame_index for f in self.frames]
        if len(set(indices)) != len(indices):
            raise ValidationError("frame_index values must be unique within a clip")

    @property
    def duration_seconds(self) -> float:
        return len(self.frames) / self.fps

    def is_overlong(self) -> bool:
        # +1 frame of slack so a 150-frame clip at 15 fps is exactly nominal
        return len(self.frames) > int(NOMINAL_CLIP_SECONDS * self.fps) + 1


@dataclass(frozen=True)
class ClipResult:
    clip_id: str
    state: ClipState
    frame_counts: dict
    mean_affect: Optional[AffectPoint] = None
    warnings: Tuple[str, ...] = ()
    dropped_frames: int = 0


def label_frame(frame: FramePrediction, cfg: ThresholdConfig, strict: bool = True) -> FrameLabel:
    """Label one frame by presence and focus.

    Faces below the detector confidence floor are ignored. A frame with
    exactly one qualifying face must carry pose and affect; in strict mode
    a frame missing either is rejected, in lenient mode it is dropped.
    """
    qualifying = 0
    for face in frame.faces:
        if face.confidence >= cfg.face_confidence_min:
            qualifying += 1
    if qualifying == 0:
        return FrameLabel.NO_FACE
    if qualifying >= 2:
        return FrameLabel.MULTIPLE_FACES
    if frame.pose is None or frame.affect is None:
        missing = "pose" if frame.pose is None else "affect"
        if strict:
            raise FrameValidationError(
                f"frame {frame.frame_index}: single face but {missing} prediction missing",
                frame_index=frame.frame_index,
            )
        return FrameLabel.DROPPED
    if not is_focused(frame.pose, cfg):
        return FrameLabel.UNFOCUSED
    return FrameLabel.FOCUSED


def analyze_clip(clip: ClipObservation, cfg: ThresholdConfig, strict: bool = True) -> ClipResult:
    """Reduce a clip to one ClipState.

    Gate order: no-face ratio, multiple-face ratio (both over all frames),
    unfocused ratio (over single-face frames), then circumplex
    classification of the mean affect of focused frames. All ratio
    comparisons are strict (>).
    """
    warnings: List[str] = []
    if clip.is_overlong():
        warnings.append(
            f"clip {clip.clip_id} has {len(clip.frames)} frames, "
            f"longer than the nominal {NOMINAL_CLIP_SECONDS:.0f}s at {clip.fps:g} fps"
        )

    no_face = multiple = unfocused = 0
    focused_affect: List[AffectPoint] = []
    dropped = 0
    for frame in clip.frames:
        label = label_frame(frame, cfg, strict=strict)
        if label is FrameLabel.NO_FACE:
            no_face += 1
        elif label is FrameLabel.MULTIPLE_FACES:
            multiple += 1
        elif label is FrameLabel.UNFOCUSED:
            unfocused += 1
        elif label is FrameLabel.FOCUSED:
            focused_affect.append(frame.affect)
        else:
            dropped += 1
    if dropped:
        warnings.append(f"{dropped} single-face frame(s) lacked pose/affect and were dropped")

    total = len(clip.frames) - dropped
    if total == 0:
        raise ValidationError(f"clip {clip.clip_id}: every frame was dropped in lenient mode")
    single_face = total - no_face - multiple
    focused = len(focused_affect)
    counts = {
        "no_face": no_face,
        "multiple_faces": multiple,
        "single_face": single_face,
        "unfocused": unfocused,
        "focused": focused,
    }

    if no_face / total > cfg.no_face_ratio_max:
        state, mean = ClipState.NO_FACE, None
    elif multiple / total > cfg.multi_face_ratio_max:
        state, mean = ClipState.MULTIPLE_FACES, None
    else:
        if single_face == 0:
            # unreachable when both presence gates pass; guarded regardless
            raise ValidationError(f"clip {clip.clip_id}: no single-face frames to analyze")
        if unfocused / single_face > cfg.unfocused_ratio_max:
            state, mean = ClipState.UNFOCUSED, None
        else:
            mean = mean_affect(focused_affect)
            state = ClipState(classify_emotion(mean, cfg).value)

    return ClipResult(
        clip_id=clip.clip_id,
        state=state,
        frame_counts=counts,
        mean_affect=mean,
        warnings=tuple(warnings),
        dropped_frames=dropped,
    )


# --- wire format -----------------------------------------------------------

def frame_from_dict(raw: dict) -> FramePrediction:
    try:
        faces = tuple(
            FaceDetection(box=tuple(float(v) for v in f["box"]), confidence=float(f["conf"]))
            for f in raw.get("faces", [])
        )
        pose = raw.get("pose")
        affect = raw.get("affect")
        return FramePrediction(
            frame_index=int(raw["frame"]),
            faces=faces,
            pose=HeadPose(float(pose["yaw"]), float(pose["pitch"]), float(pose.get("roll", 0.0)))
            if pose is not None
            else None,
            affect=AffectPoint(float(affect["valence"]), float(affect["arousal"]))
            if affect is not None
            else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed frame record: {exc}") from exc


def clip_from_dict(raw: dict) -> ClipObservation:
    if not isinstance(raw, dict):
        raise ValidationError("clip manifest must be a JSON object")
    try:
        frames = tuple(frame_from_dict(f) for f in raw["frames"])
        return ClipObservation(
            clip_id=str(raw["clip_id"]),
            learner_id=str(raw["learner_id"]),
            lesson_id=str(raw["lesson_id"]),
            recorded_at=str(raw["recorded_at"]),
            fps=float(raw.get("fps", 15)),
            frames=frames,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed clip manifest: {exc}") from exc


def frame_to_dict(frame: FramePrediction) -> dict:
    out: dict = {
        "frame": frame.frame_index,
        "faces": [{"box": list(f.box), "conf": f.confidence} for f in frame.faces],
    }
    if frame.pose is not None:
        out["pose"] = {"yaw": frame.pose.yaw, "pitch": frame.pose.pitch, "roll": frame.pose.roll}
    if frame.affect is not None:
        out["affect"] = {"valence": frame.affect.valence, "arousal": frame.affect.arousal}
    return out


def clip_to_dict(clip: ClipObservation) -> dict:
    return {
        "clip_id": clip.clip_id,
        "learner_id": clip.learner_id,
        "lesson_id": clip.lesson_id,
        "recorded_at": clip.recorded_at,
        "fps": clip.fps,
        "frames": [frame_to_dict(f) for f in clip.frames],
    }


def clip_result_to_dict(result: ClipResult) -> dict:
    out = {
        "clip_id": result.clip_id,
        "state": result.state.value,
        "frame_counts": dict(result.frame_counts),
        "warnings": list(result.warnings),
        "dropped_frames": result.dropped_frames,
    }
    if result.mean_affect is not None:
        out["mean_affect"] = {
            "valence": result.mean_affect.valence,
            "arousal": result.mean_affect.arousal,
        }
    return out


def clip_result_from_dict(raw: dict) -> ClipResult:
    mean = raw.get("mean_affect")
    return ClipResult(
        clip_id=raw["clip_id"],
        state=ClipState(raw["state"]),
        frame_counts=dict(raw["frame_counts"]),
        mean_affect=AffectPoint(mean["valence"], mean["arousal"]) if mean else None,
        warnings=tuple(raw.get("warnings", ())),
        dropped_frames=int(raw.get("dropped_frames", 0)),
    )
