"""Affective tutoring engine: prediction-stream analysis, lesson-state
aggregation, and an adaptive tutoring backend with a replay harness."""

from .affect import AffectPoint, EmotionalState, HeadPose, classify_emotion, is_focused, mean_affect
from .aggregator import (
    FeedbackCatalog,
    LessonState,
    aggregate,
    counts_from_states,
    load_feedback_catalog,
    select_feedback,
)
from .clips import (
    ClipObservation,
    ClipResult,
    ClipState,
    FaceDetection,
    FrameLabel,
    FramePrediction,
    analyze_clip,
    clip_from_dict,
    clip_to_dict,
    label_frame,
)
from .config import ThresholdConfig, load_threshold_config
from .course import (
    CognitiveStyle,
    CourseModel,
    GradeResult,
    Lesson,
    Question,
    Session,
    Test,
    course_from_dict,
    grade_test,
    load_course_fixture,
)
from .engine import TutorEngine
from .errors import (
    AccessError,
    AuthError,
    ConfigError,
    FrameValidationError,
    NoDataError,
    NotFoundError,
    TutorError,
    ValidationError,
)

__version__ = "0.1.0"
