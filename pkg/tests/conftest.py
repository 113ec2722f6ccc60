import pytest

from affective_tutor.affect import AffectPoint, HeadPose
from affective_tutor.aggregator import load_feedback_catalog
from affective_tutor.clips import ClipObservation, FaceDetection, FramePrediction
from affective_tutor.config import ThresholdConfig
from affective_tutor.course import default_course_fixture_path, load_course_fixture
from affective_tutor.engine import TutorEngine
from affective_tutor.replay import simulated_clock
from affective_tutor.storage import MemoryStore


@pytest.fixture(scope="session")
def cfg():
    return ThresholdConfig()


@pytest.fixture(scope="session")
def catalog():
    return load_feedback_catalog()


@pytest.fixture(scope="session")
def course():
    return load_course_fixture(default_course_fixture_path())


@pytest.fixture
def engine(course, cfg, catalog):
    return TutorEngine(course, cfg, catalog, MemoryStore(), clock=simulated_clock())


def face(conf=0.95):
    return FaceDetection(box=(0.3, 0.3, 0.3, 0.3), confidence=conf)


def frame(index, faces=None, yaw=0.0, pitch=0.0, valence=0.0, arousal=0.0,
          pose=True, affect=True):
    """One single-face frame unless `faces` is given explicitly."""
    if faces is None:
        faces = (face(),)
    return FramePrediction(
        frame_index=index,
        faces=tuple(faces),
        pose=HeadPose(yaw, pitch, 0.0) if pose else None,
        affect=AffectPoint(valence, arousal) if affect else None,
    )


def make_clip(frames, clip_id="clip-1", learner_id="lrn", lesson_id="les", fps=15):
    return ClipObservation(
        clip_id=clip_id,
        learner_id=learner_id,
        lesson_id=lesson_id,
        recorded_at="2024-01-01T09:00:00+00:00",
        fps=fps,
        frames=tuple(frames),
    )
