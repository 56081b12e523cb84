import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercol.basal import BasalDecision, SurpriseState, basal_surprise, decide
from hypercol.parser import Prediction


def pred(token, forecast):
    return Prediction(token, forecast, False)


def test_decide_counts_columns_not_magnitudes():
    columns = [
        (0, {"d": 3, "n": 0}, pred("dAAA", 1.0)),
        (1, {"d": 1, "n": 0}, pred("dBBB", 5.0)),
        (2, {"d": 9, "n": 0}, pred("dCCC", 2.0)),
        (3, {"d": 0, "n": 2}, pred("nDDD", 9.0)),
        (4, {"d": 0, "n": 0}, pred("nEEE", 0.0)),
    ]
    rng = np.random.default_rng(0)
    decision = decide(columns, ["d", "n"], rng)
    assert decision.fb == {"d": 3, "n": 1}
    assert decision.action == "d"
    assert decision.winner == 1  # highest forecast among columns predicting 'd'
    assert decision.winner_predicts_action and not decision.exploratory


def test_decide_single_column():
    decision = decide([(7, {"u": 1}, pred("uXYZ", 0.5))], ["u"],
                      np.random.default_rng(0))
    assert decision.action == "u" and decision.winner == 7


def test_decide_all_zero_falls_back_to_exploration():
    columns = [(1, {"a": 0, "b": 0}, pred("aAAA", 0.0)),
               (5, {"a": 0, "b": 0}, pred("bBBB", 0.0))]
    actions = ["a", "b"]
    seen = set()
    for seed in range(20):
        decision = decide(columns, actions, np.random.default_rng(seed))
        assert decision.exploratory
        seen.add(decision.action)
    assert seen == {"a", "b"}


def test_decide_tie_breaks():
    # action tie: lowest codepoint wins
    columns = [(0, {"b": 1, "a": 1}, pred("aAAA", 1.0))]
    decision = decide(columns, ["b", "a"], np.random.default_rng(0))
    assert decision.action == "a"
    # winner tie on forecast: lowest column id wins
    columns = [(3, {"a": 1}, pred("aAAA", 2.0)), (1, {"a": 1}, pred("aBBB", 2.0))]
    decision = decide(columns, ["a"], np.random.default_rng(0))
    assert decision.winner == 1


def test_decide_no_predictor_for_chosen_action():
    columns = [(2, {"a": 1}, pred("bZZZ", 9.0)), (4, {"a": 1}, pred("bYYY", 1.0))]
    decision = decide(columns, ["a", "b"], np.random.default_rng(0))
    assert decision.action == "a"
    assert decision.winner == 2 and not decision.winner_predicts_action


def test_decide_empty_column_set():
    with pytest.raises(ValueError):
        decide([], ["a"], np.random.default_rng(0))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)),
                min_size=1, max_size=8),
       st.floats(1.01, 100.0))
def test_fb_sign_invariance(raw, scale):
    actions = ["a", "b"]
    cols = [(i, {"a": fa, "b": fb}, pred("aXXX", 0.0))
            for i, (fa, fb) in enumerate(raw)]
    scaled = [(i, {"a": fa * scale if fa > 0 else fa,
                   "b": fb * scale if fb > 0 else fb}, p)
              for (i, (fa, fb)), (_, _, p) in zip(enumerate(raw), cols)]
    a = decide(cols, actions, np.random.default_rng(7))
    b = decide(scaled, actions, np.random.default_rng(7))
    assert a.fb == b.fb and a.action == b.action


def test_fb_monotone_in_positive_columns():
    base = [(0, {"a": 1}, pred("aAAA", 1.0))]
    more = base + [(1, {"a": 4}, pred("aBBB", 0.5))]
    rng = np.random.default_rng(0)
    assert decide(more, ["a"], rng).fb["a"] >= decide(base, ["a"], rng).fb["a"]


def test_basal_surprise_worked_example():
    state = SurpriseState(threshold=1, margin=0.0, cooldown_steps=0)
    sb, fired = basal_surprise(state, {1: 1.7, 2: 0.0, 3: 0.3})
    assert sb == 2 and fired == 1


def test_basal_surprise_no_positives():
    state = SurpriseState(threshold=1, margin=0.0)
    sb, fired = basal_surprise(state, {1: 0.0, 2: -3.0})
    assert sb == 0 and fired == 0


def test_basal_surprise_cooldown():
    state = SurpriseState(threshold=0, margin=0.0, cooldown_steps=3)
    surprises = {1: 1.0}
    assert basal_surprise(state, surprises) == (1, 1)   # ready at start
    assert basal_surprise(state, surprises) == (1, 0)   # cooling down
    assert basal_surprise(state, surprises) == (1, 0)
    assert basal_surprise(state, surprises) == (1, 0)
    assert basal_surprise(state, surprises) == (1, 1)   # cooldown elapsed


def test_basal_surprise_margin():
    state = SurpriseState(threshold=0, margin=0.5, cooldown_steps=0)
    sb, fired = basal_surprise(state, {1: 0.4, 2: 0.6})
    assert sb == 1 and fired == 1


def test_basal_surprise_streak_mode():
    state = SurpriseState(threshold=10, margin=0.0, cooldown_steps=0, streak=True)
    sb1, _ = basal_surprise(state, {1: 1.0, 2: 1.0})
    assert sb1 == 2
    sb2, _ = basal_surprise(state, {1: 1.0})
    assert sb2 == 2  # column 1 counted double: surprised twice in a row
    sb3, _ = basal_surprise(state, {2: 1.0})
    assert sb3 == 1


def test_inner_reward_at_most_one_per_step():
    state = SurpriseState(threshold=0, margin=0.0, cooldown_steps=0)
    _, fired = basal_surprise(state, {i: 5.0 for i in range(50)})
    assert fired == 1
