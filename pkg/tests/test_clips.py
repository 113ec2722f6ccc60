import pytest
from hypothesis import given, settings, strategies as st

from affective_tutor.affect import AffectPoint
from affective_tutor.clips import (
    ClipState,
    FrameLabel,
    analyze_clip,
    clip_from_dict,
    clip_result_from_dict,
    clip_result_to_dict,
    clip_to_dict,
    label_frame,
)
from affective_tutor.errors import FrameValidationError, ValidationError

from conftest import face, frame, make_clip


class TestLabelFrame:
    def test_no_faces(self, cfg):
        assert label_frame(frame(0, faces=()), cfg) is FrameLabel.NO_FACE

    def test_sub_threshold_faces_count_as_no_face(self, cfg):
        f = frame(0, faces=(face(0.65), face(0.68)))
        assert label_frame(f, cfg) is FrameLabel.NO_FACE

    def test_confidence_boundary_inclusive(self, cfg):
        assert label_frame(frame(0, faces=(face(0.7),)), cfg) is FrameLabel.FOCUSED
        assert label_frame(frame(0, faces=(face(0.69),)), cfg) is FrameLabel.NO_FACE

    def test_multiple_faces(self, cfg):
        assert label_frame(frame(0, faces=(face(), face())), cfg) is FrameLabel.MULTIPLE_FACES

    def test_focused_single_face(self, cfg):
        f = frame(0, yaw=10, pitch=0, valence=4, arousal=4)
        assert label_frame(f, cfg) is FrameLabel.FOCUSED

    def test_unfocused_single_face(self, cfg):
        assert label_frame(frame(0, yaw=40), cfg) is FrameLabel.UNFOCUSED

    def test_strict_mode_missing_pose(self, cfg):
        with pytest.raises(FrameValidationError) as exc:
            label_frame(frame(12, pose=False), cfg)
        assert exc.value.frame_index == 12

    def test_strict_mode_missing_affect(self, cfg):
        with pytest.raises(FrameValidationError):
            label_frame(frame(0, affect=False), cfg)

    def test_lenient_mode_drops(self, cfg):
        assert label_frame(frame(0, pose=False), cfg, strict=False) is FrameLabel.DROPPED


class TestAnalyzeClip:
    def test_no_face_ratio_boundary(self, cfg):
        # 38/150 ~ 0.2533 > 0.25 -> NoFace; 37/150 ~ 0.2467 -> proceeds
        def build(n_no_face):
            frames = [frame(i, faces=()) for i in range(n_no_face)]
            frames += [frame(i, valence=0, arousal=0) for i in range(n_no_face, 150)]
            return make_clip(frames)

        assert analyze_clip(build(38), cfg).state is ClipState.NO_FACE
        assert analyze_clip(build(37), cfg).state is ClipState.NEUTRAL

    def test_multi_face_ratio_boundary(self, cfg):
        def build(n_multi):
            frames = [frame(i, faces=(face(), face())) for i in range(n_multi)]
            frames += [frame(i) for i in range(n_multi, 150)]
            return make_clip(frames)

        assert analyze_clip(build(38), cfg).state is ClipState.MULTIPLE_FACES
        assert analyze_clip(build(37), cfg).state is ClipState.NEUTRAL

    def test_unfocused_ratio_boundary(self, cfg):
        # 4/10 = 0.4 > 0.35 -> Unfocused; 3/10 = 0.3 -> proceeds
        def build(n_unfocused):
            frames = [frame(i, yaw=45) for i in range(n_unfocused)]
            frames += [frame(i) for i in range(n_unfocused, 10)]
            return make_clip(frames)

        assert analyze_clip(build(4), cfg).state is ClipState.UNFOCUSED
        assert analyze_clip(build(3), cfg).state is ClipState.NEUTRAL

    def test_all_engaged(self, cfg):
        clip = make_clip([frame(i, valence=5, arousal=5) for i in range(150)])
        result = analyze_clip(clip, cfg)
        assert result.state is ClipState.ENGAGED
        assert result.mean_affect == AffectPoint(5, 5)

    def test_unfocused_denominator_is_single_face(self, cfg):
        # 2 no-face, 3 unfocused, 5 focused: 3/8 = 0.375 > 0.35 even though
        # 3/10 over all frames would pass the gate
        frames = [frame(i, faces=()) for i in range(2)]
        frames += [frame(i, yaw=45) for i in range(2, 5)]
        frames += [frame(i) for i in range(5, 10)]
        assert analyze_clip(make_clip(frames), cfg).state is ClipState.UNFOCUSED

    def test_counts_conservation(self, cfg):
        frames = [frame(0, faces=()), frame(1, faces=(face(), face())), frame(2, yaw=45),
                  frame(3), frame(4)]
        result = analyze_clip(make_clip(frames), cfg)
        c = result.frame_counts
        assert c["no_face"] + c["multiple_faces"] + c["single_face"] == 5
        assert c["unfocused"] + c["focused"] == c["single_face"]

    def test_single_frame_clip_is_legal(self, cfg):
        result = analyze_clip(make_clip([frame(0, valence=5, arousal=5)]), cfg)
        assert result.state is ClipState.ENGAGED

    def test_overlong_clip_warns(self, cfg):
        clip = make_clip([frame(i) for i in range(200)])
        result = analyze_clip(clip, cfg)
        assert any("longer" in w for w in result.warnings)

    def test_strict_error_propagates(self, cfg):
        clip = make_clip([frame(0), frame(1, pose=False)])
        with pytest.raises(FrameValidationError):
            analyze_clip(clip, cfg)

    def test_lenient_drops_and_warns(self, cfg):
        frames = [frame(0, valence=5, arousal=5), frame(1, pose=False), frame(2, affect=False)]
        result = analyze_clip(make_clip(frames), cfg, strict=False)
        assert result.dropped_frames == 2
        assert result.state is ClipState.ENGAGED
        assert any("dropped" in w for w in result.warnings)

    def test_empty_clip_rejected(self, cfg):
        with pytest.raises(ValidationError):
            make_clip([])

    def test_duplicate_frame_index_rejected(self, cfg):
        with pytest.raises(ValidationError):
            make_clip([frame(0), frame(0)])

    def test_permutation_invariance(self, cfg):
        frames = (
            [frame(i, faces=()) for i in range(3)]
            + [frame(i, yaw=45) for i in range(3, 6)]
            + [frame(i, valence=3, arousal=3) for i in range(6, 15)]
        )
        forward = analyze_clip(make_clip(frames), cfg)
        backward = analyze_clip(make_clip(list(reversed(frames))), cfg)
        assert forward.state is backward.state
        assert forward.frame_counts == backward.frame_counts
        assert forward.mean_affect == backward.mean_affect

    def test_no_face_gate_shadows_pose_and_affect(self, cfg):
        # once NoFace wins, pose/affect perturbations cannot change the state
        base = [frame(i, faces=()) for i in range(6)]
        for yaw, v in ((0, 5), (45, -5), (10, 0)):
            frames = base + [frame(i, yaw=yaw, valence=v, arousal=v) for i in range(6, 10)]
            assert analyze_clip(make_clip(frames), cfg).state is ClipState.NO_FACE

    @settings(max_examples=30, deadline=None)
    @given(
        n_no_face=st.integers(0, 6),
        n_multi=st.integers(0, 6),
        n_unfocused=st.integers(0, 6),
        n_focused=st.integers(1, 8),
    )
    def test_small_n_never_divides_by_zero(self, cfg, n_no_face, n_multi, n_unfocused, n_focused):
        frames = []
        i = 0
        for _ in range(n_no_face):
            frames.append(frame(i, faces=())); i += 1
        for _ in range(n_multi):
            frames.append(frame(i, faces=(face(), face()))); i += 1
        for _ in range(n_unfocused):
            frames.append(frame(i, yaw=45)); i += 1
        for _ in range(n_focused):
            frames.append(frame(i, valence=2, arousal=2)); i += 1
        result = analyze_clip(make_clip(frames), cfg)
        assert result.state in ClipState

    def test_each_state_reachable(self, cfg):
        builders = {
            ClipState.NO_FACE: [frame(i, faces=()) for i in range(5)],
            ClipState.MULTIPLE_FACES: [frame(i, faces=(face(), face())) for i in range(5)],
            ClipState.UNFOCUSED: [frame(i, yaw=45) for i in range(3)] + [frame(3)],
            ClipState.ENGAGED: [frame(i, valence=5, arousal=5) for i in range(4)],
            ClipState.TIRED: [frame(i, valence=0, arousal=-8) for i in range(4)],
            ClipState.CONFUSED: [frame(i, valence=-4, arousal=3) for i in range(4)],
            ClipState.DISENGAGED: [frame(i, valence=-4, arousal=-1.6) for i in range(4)],
            ClipState.NEUTRAL: [frame(i) for i in range(4)],
        }
        for expected, frames in builders.items():
            assert analyze_clip(make_clip(frames), cfg).state is expected


class TestWireFormat:
    def test_round_trip(self, cfg):
        clip = make_clip(
            [frame(0, valence=2, arousal=-1), frame(1, faces=()), frame(2, yaw=40)]
        )
        assert clip_from_dict(clip_to_dict(clip)) == clip

    def test_malformed_rejected(self):
        with pytest.raises(ValidationError):
            clip_from_dict({"clip_id": "x"})
        with pytest.raises(ValidationError):
            clip_from_dict(
                {
                    "clip_id": "x", "learner_id": "l", "lesson_id": "les",
                    "recorded_at": "t", "fps": 15,
                    "frames": [{"faces": []}],  # missing frame index
                }
            )

    def test_result_round_trip(self, cfg):
        result = analyze_clip(make_clip([frame(0, valence=5, arousal=5)]), cfg)
        assert clip_result_from_dict(clip_result_to_dict(result)) == result
