import json
import math

import numpy as np
import pytest

from gtbwt.filters import filter_set
from gtbwt.tree import (
    PlanError,
    TreePlan,
    build_binary_tree,
    build_generalized_tree,
    leaf_order,
    level_orders,
    load_plan,
    save_plan,
)

S2 = math.sqrt(2.0)


def length_law(n, fl):
    out = [n]
    while True:
        n = (n + fl - 1) // 2
        out.append(n)
        if n < max(fl, 2):
            return out


def eight_leaf_points():
    # leaves 1..8 (1-based) placed so that the natural pairs are
    # (1,3) (4,8) (2,5) (6,7), then ((1,3),(4,8)) and ((2,5),(6,7))
    pos = {1: 0.0, 3: 1.0, 4: 10.0, 8: 11.0, 2: 100.0, 5: 101.0, 6: 110.0, 7: 111.0}
    return np.array([pos[i] for i in range(1, 9)])


def test_eight_leaf_binary_order():
    plan = build_binary_tree(eight_leaf_points(), first=[[0, 3, 1, 5], [0, 2], [0]])
    assert (leaf_order(plan) + 1).tolist() == [1, 3, 4, 8, 2, 5, 6, 7]


def test_binary_tree_two_identical_points():
    plan = build_binary_tree(np.array([[2.0, -1.0], [2.0, -1.0]]), keep_points=True)
    np.testing.assert_allclose(plan.points[-1], S2 * np.array([[2.0, -1.0]]), atol=1e-14)


def test_binary_tree_line_example():
    plan = build_binary_tree(np.array([0.0, 9.0, 1.0, 10.0]), first=[[0, 1]],
                             keep_points=True)
    assert plan.perms[0].tolist() == [0, 2, 1, 3]
    np.testing.assert_allclose(plan.points[1].ravel(), [1 / S2, 19 / S2], atol=1e-14)


def test_binary_tree_rejects_non_power_of_two():
    with pytest.raises(PlanError):
        build_binary_tree(np.zeros((6, 2)))


def test_generalized_level_order_example():
    # 4 points on a line: greedy from point 0 gives [0, 2, 1, 3]
    c = np.array([[0.0], [10.0], [1.0], [11.0]])
    plan = build_generalized_tree(c, "db1", keep_points=True, max_depth=1)
    assert plan.perms[0].tolist() == [0, 2, 1, 3]
    np.testing.assert_array_equal(plan.points[0][plan.perms[0]], c[[0, 2, 1, 3]])


def test_generalized_identical_points():
    X = np.ones((8, 3))
    plan = build_generalized_tree(X, "db1", keep_points=True, start=0)
    for lvl, perm in enumerate(plan.perms):
        assert perm.tolist() == list(range(len(perm)))
    for a, b in zip(plan.points[:-1], plan.points[1:]):
        np.testing.assert_allclose(b, S2 * a[: len(b)], atol=1e-12)


@pytest.mark.parametrize("name", ["db1", "db4", "sym8"])
def test_lengths_follow_law(name):
    fs = filter_set(name)
    X = np.random.default_rng(0).normal(size=(300, 4))
    plan = build_generalized_tree(X, fs)
    assert plan.lengths == length_law(300, fs.length)


def test_depth_sym8_16384_leaves():
    assert len(length_law(16384, 16)) - 1 == 14
    # depth for the real point count, built on cheap 1-D features
    X = np.random.default_rng(1).normal(size=(16384, 1))
    plan = build_generalized_tree(X, "sym8", max_depth=None)
    assert plan.depth == 14
    assert plan.lengths[-2] == 16 and plan.lengths[-1] == 15


def test_min_length_and_max_depth_overrides():
    X = np.random.default_rng(2).normal(size=(64, 2))
    assert build_generalized_tree(X, "db1", max_depth=3).depth == 3
    assert build_generalized_tree(X, "db1", min_length=16).lengths[-1] < 16
    with pytest.raises(PlanError):
        build_generalized_tree(np.zeros((1, 2)), "db1")


def test_binary_coarse_points_are_pair_means():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(16, 3))
    b = build_binary_tree(X, rng=np.random.default_rng(4), keep_points=True)
    g = build_generalized_tree(X, "db1", keep_points=True)
    # coarse points equal (u + v) / sqrt(2) over the formed pairs
    C = X
    for perm, ref in zip(b.perms, b.points[1:]):
        C = (C[perm][0::2] + C[perm][1::2]) / S2
        key = lambda A: sorted(map(tuple, np.round(A, 10)))  # noqa: E731
        assert key(C) == key(ref)
    assert g.lengths == b.lengths


def test_level_orders_consistent():
    X = np.random.default_rng(5).normal(size=(8, 2))
    plan = build_binary_tree(X, rng=np.random.default_rng(6))
    orders = level_orders(plan)
    assert sorted(orders[0].tolist()) == list(range(8))
    assert orders[-1].tolist() == [0]


def test_save_load_round_trip(tmp_path):
    X = np.random.default_rng(7).normal(size=(50, 3))
    plan = build_generalized_tree(X, "sym4", rng=np.random.default_rng(1), epsilon=0.1)
    path = tmp_path / "p.json"
    save_plan(plan, path)
    back = load_plan(path)
    assert back == plan
    assert all(np.array_equal(a, b) for a, b in zip(back.perms, plan.perms))
    doc = json.loads(path.read_text())
    for lvl, p in zip(doc["levels"], plan.perms):
        assert lvl["perm"] == (p + 1).tolist()  # stored 1-based
        assert lvl["length"] == len(p)
    assert doc["filter"] == "sym4" and doc["leaf_count"] == 50


def test_corrupt_plan_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    with pytest.raises(PlanError):
        load_plan(bad)
    bad.write_text('{"format": "gtbwt-plan", "version": 1, "filter": "db1", '
                   '"leaf_count": 4, "levels": [{"length": 4, "perm": [1, 1, 2, 3]}]}')
    with pytest.raises(PlanError):
        load_plan(bad)
    bad.write_text('{"format": "other"}')
    with pytest.raises(PlanError):
        load_plan(bad)


def test_plan_rejects_bad_permutation():
    with pytest.raises(PlanError):
        TreePlan("db1", 4, [[0, 1, 2, 2]])
