import random

import pytest
from hypothesis import given, strategies as st

from affective_tutor.aggregator import (
    CONFUSION_STATES,
    PRIORITY_ORDER,
    FeedbackCatalog,
    LessonState,
    aggregate,
    counts_from_states,
    load_feedback_catalog,
    select_feedback,
)
from affective_tutor.clips import ClipState
from affective_tutor.config import ThresholdConfig
from affective_tutor.errors import ConfigError
from affective_tutor.replay import oracle_aggregate, random_counts

counts_strategy = st.fixed_dictionaries({state: st.integers(0, 6) for state in ClipState})


class TestAggregate:
    def test_worked_example(self, cfg):
        assert aggregate({ClipState.TIRED: 3, ClipState.CONFUSED: 3}, cfg) \
            is LessonState.TIRED_CONFUSED

    def test_all_zero_is_neutral(self, cfg):
        assert aggregate({}, cfg) is LessonState.NEUTRAL

    @pytest.mark.parametrize(
        "counts,expected",
        [
            ({ClipState.NO_FACE: 5}, LessonState.NUMEROUS_NO_FACES),
            ({ClipState.NO_FACE: 3}, LessonState.NO_FACE),
            ({ClipState.ENGAGED: 2}, LessonState.ENGAGED),
            ({ClipState.ENGAGED: 1}, LessonState.NEUTRAL),
            ({ClipState.DISENGAGED: 1}, LessonState.DISENGAGED),
            ({ClipState.TIRED: 3, ClipState.UNFOCUSED: 3, ClipState.CONFUSED: 3},
             LessonState.TIRED_UNFOCUSED),
            ({ClipState.NO_FACE: 3, ClipState.MULTIPLE_FACES: 3},
             LessonState.NO_FACE_PLUS_MULTIPLE_FACES),
            ({ClipState.TIRED: 2, ClipState.CONFUSED: 3}, LessonState.CONFUSED),
        ],
    )
    def test_threshold_cases(self, cfg, counts, expected):
        assert aggregate(counts, cfg) is expected

    def test_priority_order_has_21_states(self):
        assert len(PRIORITY_ORDER) == 21
        assert PRIORITY_ORDER[0] is LessonState.NO_FACE_PLUS_MULTIPLE_FACES
        assert PRIORITY_ORDER[-1] is LessonState.NEUTRAL

    def test_oracle_equivalence_seeded(self, cfg):
        rng = random.Random(42)
        for _ in range(10_000):
            counts = random_counts(rng)
            assert aggregate(counts, cfg) is oracle_aggregate(counts, cfg)

    def test_priority_monotonicity(self, cfg):
        rng = random.Random(7)
        order = {state: i for i, state in enumerate(PRIORITY_ORDER)}
        for _ in range(1_000):
            lo = random_counts(rng, max_count=4)
            hi = {state: n + rng.randint(0, 3) for state, n in lo.items()}
            assert order[aggregate(hi, cfg)] <= order[aggregate(lo, cfg)]

    @given(counts=counts_strategy)
    def test_total_and_matches_oracle(self, cfg, counts):
        state = aggregate(counts, cfg)
        assert state in LessonState
        assert state is oracle_aggregate(counts, cfg)

    def test_counts_from_states(self):
        states = [ClipState.TIRED, ClipState.TIRED, ClipState.ENGAGED]
        assert counts_from_states(states) == {ClipState.TIRED: 2, ClipState.ENGAGED: 1}


class TestFeedback:
    def test_catalog_completeness(self, catalog):
        for state in LessonState:
            assert catalog.message(state, "plain")
        for state in CONFUSION_STATES:
            assert catalog.message(state, "with_supplementary")

    def test_engaged_message(self, catalog):
        fb = select_feedback(LessonState.ENGAGED, True, catalog)
        assert fb.message == "Excellent! Keep it up."
        assert not fb.recommend_supplementary

    def test_confused_with_supplementary(self, catalog):
        fb = select_feedback(LessonState.CONFUSED, True, catalog)
        assert fb.recommend_supplementary
        assert "supplementary" in fb.message

    def test_confused_without_supplementary(self, catalog):
        fb = select_feedback(LessonState.CONFUSED, False, catalog)
        assert not fb.recommend_supplementary
        assert fb.message == catalog.message(LessonState.CONFUSED, "plain")

    def test_recommendation_matrix(self, catalog):
        # exhaustive 21 x 2 check: recommendation fires only for the four
        # confusion states with content available
        for state in LessonState:
            for has_supp in (False, True):
                fb = select_feedback(state, has_supp, catalog)
                assert fb.recommend_supplementary == (state in CONFUSION_STATES and has_supp)

    def test_incomplete_catalog_rejected(self):
        with pytest.raises(ConfigError):
            FeedbackCatalog({(LessonState.NEUTRAL, "plain"): "ok"})

    def test_supplementary_variant_outside_confusion_rejected(self, catalog):
        messages = {(s, "plain"): "m" for s in LessonState}
        messages.update({(s, "with_supplementary"): "m" for s in CONFUSION_STATES})
        messages[(LessonState.TIRED, "with_supplementary")] = "m"
        with pytest.raises(ConfigError):
            FeedbackCatalog(messages)

    def test_messages_are_first_person(self, catalog):
        # singular first-person phrasing: no message addresses "we the system"
        # as plural teaching staff; spot-check a couple of known messages
        assert catalog.message(LessonState.NEUTRAL, "plain") == "You can proceed to the next video."
