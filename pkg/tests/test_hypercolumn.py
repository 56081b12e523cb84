import numpy as np
import pytest

from hypercol.hypercolumn import Layer1Column, Layer2Column
from hypercol.parser import ParserConfig

L1_CFG = ParserConfig(max_word_len=1, threshold=50, decay=0.9, memory=4)
L2_CFG = ParserConfig(max_word_len=4, max_vocab=5000, threshold=2, decay=0.8,
                      memory=4, mode="value", open_alphabet=True)


def l1(unique_limit=100, clusters=5, inhibit=True):
    return Layer1Column(0, (0, 1), unique_limit=unique_limit, clusters=clusters,
                        seed=1, parser_config=L1_CFG, inhibit_unchanged=inhibit)


def test_bootstrap_then_parser_creation_step():
    col = l1(unique_limit=100, clusters=5)
    outs = []
    for i in range(101):
        outs.append(col.step((float(i), 0.0), 0.0))
    # all 101 collection steps return nothing; the 101st fitted the codebook
    assert outs == [None] * 101
    assert col.parser is not None and col.codebook is not None
    assert col.distinct_count == 101
    out = col.step((3.0, 0.0), 0.0)
    assert out is not None and len(out.letter) == 1


def test_duplicate_vectors_do_not_advance_bootstrap():
    col = l1(unique_limit=100)
    for _ in range(500):
        col.step((1.0, 1.0), 0.0)
    assert col.parser is None
    assert col.distinct_count == 1


def test_inhibition_same_letter():
    col = l1(unique_limit=2, clusters=2)
    for v in [(0.0, 0.0), (100.0, 100.0), (50.0, 50.0)]:
        col.step(v, 0.0)
    assert col.parser is not None
    col.step((0.0, 0.0), 0.0)
    tables = col.parser.dump_tables()
    first = col.step((1.0, 1.0), 0.0)   # same cluster as (0,0)
    assert first.letter == col.last_letter
    assert col.parser.dump_tables() == tables  # inhibited: no observe
    assert first.event.tokens == () and first.event.surprise == 0.0
    assert first.prediction is not None


def test_inhibition_disabled_observes_every_step():
    col = l1(unique_limit=2, clusters=2, inhibit=False)
    for v in [(0.0, 0.0), (100.0, 100.0), (50.0, 50.0)]:
        col.step(v, 0.0)
    a = col.step((0.0, 0.0), 0.0)
    b = col.step((0.0, 0.0), 0.0)
    assert a.event.tokens != () and b.event.tokens != ()


def test_observe_count_equals_letter_changes():
    rng = np.random.default_rng(0)
    vecs = [(float(rng.integers(4)) * 100, 0.0) for _ in range(300)]
    inhibited = Layer1Column(0, (0, 1), unique_limit=3, clusters=4, seed=1,
                             parser_config=L1_CFG, inhibit_unchanged=True)
    free = Layer1Column(1, (0, 1), unique_limit=3, clusters=4, seed=1,
                        parser_config=L1_CFG, inhibit_unchanged=False)
    observed = 0
    letters = []
    for v in vecs:
        out = inhibited.step(v, 0.0)
        if out is not None and out.event.tokens:
            observed += 1
        out2 = free.step(v, 0.0)
        if out2 is not None:
            letters.append(out2.letter)
    changes = 1 + sum(1 for a, b in zip(letters, letters[1:]) if a != b)
    assert observed == changes


def test_centroids_frozen_after_fit():
    col = l1(unique_limit=3, clusters=3)
    for i in range(10):
        col.step((float(i), float(i)), 0.0)
    frozen = col.codebook.centroids.tobytes()
    for i in range(50):
        col.step((float(i * 7 % 13), 1.0), 0.0)
    assert col.codebook.centroids.tobytes() == frozen


def test_dimension_mismatch():
    col = l1()
    with pytest.raises(ValueError):
        col.step((1.0, 2.0, 3.0), 0.0)


def test_l1_frozen_mode_never_bootstraps():
    col = l1(unique_limit=2, clusters=2)
    for i in range(10):
        assert col.step((float(i), 0.0), 0.0, learn=False) is None
    assert col.distinct_count == 0


def l2():
    return Layer2Column(10, (0, 1, 2), L2_CFG)


def test_l2_cold_start():
    col = l2()
    out = col.step("nABC", 0.0, ["n", "d"])
    assert out.prediction.fallback and out.prediction.next == "nABC"
    assert out.feelings == {"n": 0, "d": 0}


def test_l2_requires_value_open_parser():
    with pytest.raises(Exception):
        Layer2Column(10, (0, 1, 2), ParserConfig(mode="situation", open_alphabet=True))
    with pytest.raises(Exception):
        Layer2Column(10, (0, 1), L2_CFG)


def test_l2_malformed_composite():
    col = l2()
    with pytest.raises(ValueError):
        col.step("nAB", 0.0, ["n"])


def test_l2_feelings_match_parser_oracle():
    col = l2()
    for succ, r in [("dXYZ", 2.0), ("dQRS", 0.5), ("dAAA", -1.0), ("nBBB", 3.0)]:
        col.step("nABC", 0.0, ["d", "n"])
        col.step(succ, r, ["d", "n"])
        col.reset_transient()
    out = col.step("nABC", 0.0, ["d", "n"])
    assert out.feelings == {"d": 2, "n": 1}
    assert out.prediction.next == "nBBB" and out.prediction.reward_forecast == 3.0


def test_l2_inhibition_on_repeat_composite():
    col = l2()
    col.step("nABC", 0.0, ["n"])
    tables = col.parser.dump_tables()
    out = col.step("nABC", 5.0, ["n"])
    assert col.parser.dump_tables() == tables
    assert out.event.tokens == () and out.event.surprise == 0.0


def test_l2_frozen_unknown_composite_skipped():
    col = l2()
    col.step("nABC", 0.0, ["n"])
    before = col.parser.vocab_size
    out = col.step("dXYZ", 1.0, ["n"], learn=False)
    assert col.parser.vocab_size == before
    assert out is not None  # retained previous output
    assert out.event.tokens == ()
