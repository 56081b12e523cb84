import numpy as np
import pytest

from hypercol.errors import ConfigError
from hypercol.thalamus import ActionCoder, Thalamus, make_plan


def test_plan_structure_and_reproducibility():
    a = make_plan(8, 4, 2, seed=42)
    b = make_plan(8, 4, 2, seed=42)
    assert a == b
    assert len(a.subsets) == 4
    for s in a.subsets:
        assert len(s) == 2 and len(set(s)) == 2
        assert all(0 <= i < 8 for i in s)


def test_plan_bounds():
    with pytest.raises(ConfigError):
        make_plan(8, 2, 2, seed=0)  # p < 3
    with pytest.raises(ConfigError):
        make_plan(4, 3, 5, seed=0)  # m > sensor_dim
    full = make_plan(4, 3, 4, seed=0)  # m == sensor_dim: every subset is all dims
    for s in full.subsets:
        assert sorted(s) == [0, 1, 2, 3]


def test_disjoint_subsets():
    plan = make_plan(8, 4, 2, seed=1, disjoint=True)
    seen = [i for s in plan.subsets for i in s]
    assert sorted(seen) == sorted(set(seen))
    with pytest.raises(ConfigError):
        make_plan(8, 5, 2, seed=1, disjoint=True)  # 10 > 8


def test_plan_describe():
    plan = make_plan(4, 3, 1, seed=0)
    text = plan.describe()
    assert text.splitlines()[0].startswith("subset_0: [")


def test_route():
    t = Thalamus(4, 1, 3, 2, seed=5, action_clusters=3)
    t.plan = type(t.plan)(((0, 2), (1, 3), (3, 0)), 5)
    t._index_arrays = [np.asarray(s, dtype=np.intp) for s in t.plan.subsets]
    parts = t.route((9.0, 8.0, 7.0, 6.0))
    assert [list(p) for p in parts] == [[9.0, 7.0], [8.0, 6.0], [6.0, 9.0]]
    again = t.route((9.0, 8.0, 7.0, 6.0))
    assert all(np.array_equal(x, y) for x, y in zip(parts, again))
    with pytest.raises(ValueError):
        t.route((1.0, 2.0))


def test_plan_immutable_across_routes():
    t = Thalamus(6, 1, 3, 2, seed=9, action_clusters=3)
    before = repr(t.plan)
    rng = np.random.default_rng(0)
    for _ in range(50):
        t.route(rng.normal(size=6))
    assert repr(t.plan) == before


def test_action_coder_bijection_on_three_actions():
    coder = ActionCoder(1, 3, seed=4)
    for v in ([0.0], [1.0], [2.0], [0.0]):
        coder.collect(v)
    assert coder.letter([0.0]) is None  # not fitted yet
    assert coder.try_fit()
    letters = {coder.letter([v]) for v in (0.0, 1.0, 2.0)}
    assert letters == {"a", "b", "c"}
    for v in (0.0, 1.0, 2.0):
        letter = coder.letter([v])
        assert list(coder.decode(letter)) == [v]


def test_action_coder_fit_needs_enough_distinct():
    coder = ActionCoder(1, 3, seed=0)
    coder.collect([1.0])
    coder.collect([1.0])
    assert not coder.try_fit()
    coder.collect([2.0])
    assert not coder.try_fit()
    coder.collect([3.0])
    assert coder.try_fit()


def test_compose():
    t = Thalamus(4, 1, 3, 1, seed=0, action_clusters=3)
    assert t.compose("n", ["A", "B", "C"]) == "nABC"
    assert t.compose("d", ["X", "Y", "Z"]) == "dXYZ"
    assert t.compose("n", ["A", None, "C"]) is None
    assert t.compose(None, ["A", "B", "C"]) is None
