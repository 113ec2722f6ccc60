import math

import pytest
from hypothesis import given, strategies as st

from affective_tutor.affect import (
    AffectPoint,
    EmotionalState,
    HeadPose,
    classify_emotion,
    is_focused,
    mean_affect,
)
from affective_tutor.config import ThresholdConfig
from affective_tutor.errors import ValidationError
from affective_tutor.replay import oracle_classify

affect_values = st.floats(min_value=-10, max_value=10, allow_nan=False)


class TestClassifyEmotion:
    @pytest.mark.parametrize(
        "valence,arousal,expected",
        [
            (0, 0, EmotionalState.NEUTRAL),
            (5, 5, EmotionalState.ENGAGED),
            (-3, 2, EmotionalState.CONFUSED),
            (0, -6, EmotionalState.TIRED),
            (-3, -1.5, EmotionalState.DISENGAGED),
            (-3, 0, EmotionalState.NEUTRAL),  # gray band between alpha1 and alpha3
        ],
    )
    def test_fixed_probes(self, cfg, valence, arousal, expected):
        assert classify_emotion(AffectPoint(valence, arousal), cfg) is expected

    def test_deep_deactivation_wins_over_valence(self, cfg):
        # arousal at or below -5 is Tired regardless of valence
        for v in (-10, -2, 0, 2, 10):
            assert classify_emotion(AffectPoint(v, -5), cfg) is EmotionalState.TIRED

    def test_high_activation_is_engaged_above_alpha4(self, cfg):
        assert classify_emotion(AffectPoint(-1.9, 6), cfg) is EmotionalState.ENGAGED
        assert classify_emotion(AffectPoint(-2, 6), cfg) is EmotionalState.CONFUSED

    def test_grid_partition_matches_oracle(self, cfg):
        # 201x201 grid at 0.1 steps: exactly one of five states per point,
        # agreeing with the independently written predicate-table oracle
        seen = set()
        for vi in range(-100, 101):
            for ai in range(-100, 101):
                v, a = vi / 10.0, ai / 10.0
                state = classify_emotion(AffectPoint(v, a), cfg)
                assert state is oracle_classify(v, a, cfg)
                seen.add(state)
        assert seen == set(EmotionalState)

    def test_non_finite_rejected(self, cfg):
        with pytest.raises(ValidationError):
            AffectPoint(float("nan"), 0)
        with pytest.raises(ValidationError):
            AffectPoint(0, float("inf"))

    def test_out_of_range_clamped(self):
        p = AffectPoint(10.4, -12.0)
        assert p.valence == 10.0 and p.arousal == -10.0

    @given(v=affect_values, a=affect_values)
    def test_multiplier_identity(self, cfg, v, a):
        # with multiplier 1 the classification depends only on (v, a)
        doubled = ThresholdConfig(emotion_multiplier=2.0)
        point = AffectPoint(v, a)
        assert classify_emotion(point, cfg) is oracle_classify(v, a, cfg)
        assert classify_emotion(point, doubled) is oracle_classify(v, a, doubled)


class TestIsFocused:
    def test_interior_point(self, cfg):
        assert is_focused(HeadPose(0, 0, 0), cfg)

    def test_boundaries_inclusive(self, cfg):
        assert is_focused(HeadPose(29, 16, 0), cfg)
        assert is_focused(HeadPose(-29, -37, 0), cfg)
        assert not is_focused(HeadPose(30, 0, 0), cfg)
        assert not is_focused(HeadPose(0, -40, 0), cfg)
        assert not is_focused(HeadPose(0, 17, 0), cfg)

    def test_roll_ignored(self, cfg):
        assert is_focused(HeadPose(0, 0, 179), cfg)

    @given(
        yaw=st.floats(min_value=-180, max_value=180, allow_nan=False),
        pitch=st.floats(min_value=-37, max_value=16, allow_nan=False),
    )
    def test_yaw_symmetry(self, cfg, yaw, pitch):
        assert is_focused(HeadPose(yaw, pitch), cfg) == is_focused(HeadPose(-yaw, pitch), cfg)

    def test_angle_range_validated(self):
        with pytest.raises(ValidationError):
            HeadPose(181, 0, 0)


class TestMeanAffect:
    def test_singleton(self):
        assert mean_affect([AffectPoint(2, 2)]) == AffectPoint(2, 2)

    def test_symmetry(self):
        assert mean_affect([AffectPoint(1, 3), AffectPoint(3, 1)]) == AffectPoint(2, 2)

    def test_hand_arithmetic(self):
        points = [AffectPoint(-10, 0), AffectPoint(10, 0), AffectPoint(0, 6)]
        assert mean_affect(points) == AffectPoint(0, 2)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            mean_affect([])

    @given(st.lists(st.tuples(affect_values, affect_values), min_size=1, max_size=20))
    def test_permutation_invariant_and_in_hull(self, raw):
        points = [AffectPoint(v, a) for v, a in raw]
        mean = mean_affect(points)
        reversed_mean = mean_affect(list(reversed(points)))
        assert mean.valence == pytest.approx(reversed_mean.valence)
        assert mean.arousal == pytest.approx(reversed_mean.arousal)
        vs = [p.valence for p in points]
        ars = [p.arousal for p in points]
        assert min(vs) - 1e-9 <= mean.valence <= max(vs) + 1e-9
        assert min(ars) - 1e-9 <= mean.arousal <= max(ars) + 1e-9
