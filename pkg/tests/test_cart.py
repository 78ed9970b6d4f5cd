import numpy as np
import pydot
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from courtside import cart
from courtside.cart import ClassificationTree, GrowthConfig, Node, Split
from oracles import brute_best_split, gini_direct, random_small_dataset

SEPARABLE_X = np.array([[1.0], [2.0], [3.0], [4.0]])
SEPARABLE_Y = np.array([False, False, True, True])


@pytest.mark.parametrize("counts, expected", [((5, 5), 0.5), ((7, 0), 0.0), ((1, 3), 0.375), ((0, 0), 0.0)])
def test_gini_values(counts, expected):
    assert cart.gini(counts) == expected


@given(a=st.integers(0, 500), b=st.integers(0, 500))
def test_gini_symmetric_and_bounded(a, b):
    assert cart.gini((a, b)) == cart.gini((b, a))
    assert 0.0 <= cart.gini((a, b)) <= 0.5


def test_best_split_separable():
    s = cart.best_split(SEPARABLE_X, SEPARABLE_Y)
    assert (s.feature, s.threshold, s.gini_after) == (0, 2.5, 0.0)


def test_best_split_pure_rows():
    assert cart.best_split(np.array([[1.0], [9.0]]), np.array([True, True])) is None


def test_best_split_constant_feature():
    assert cart.best_split(np.array([[1.0], [1.0]]), np.array([True, False])) is None


def test_best_split_tie_prefers_lower_feature():
    X = np.column_stack([SEPARABLE_X[:, 0], SEPARABLE_X[:, 0]])
    assert cart.best_split(X, SEPARABLE_Y).feature == 0
    assert cart.best_split(X, SEPARABLE_Y, candidates=[1]).feature == 1


def test_best_split_matches_brute_force(rng):
    for _ in range(300):
        X, y = random_small_dataset(rng)
        got = cart.best_split(X, y)
        want = brute_best_split(X, y)
        if want is None:
            assert got is None
        else:
            assert (got.feature, got.threshold) == want[:2]
            assert got.gini_after == pytest.approx(want[2], abs=1e-12)


def test_split_never_increases_impurity(rng):
    for _ in range(100):
        X, y = random_small_dataset(rng, max_rows=30)
        s = cart.best_split(X, y)
        if s is not None:
            assert s.gini_after <= cart.gini((int((~y).sum()), int(y.sum()))) + 1e-12


def test_threshold_between_observed_values(rng):
    X = rng.normal(size=(40, 3))
    y = X[:, 1] + 0.3 * rng.normal(size=40) > 0
    s = cart.best_split(X, y)
    col = np.sort(X[:, s.feature])
    i = np.searchsorted(col, s.threshold)
    assert col[i - 1] < s.threshold <= col[i]


def test_grow_separable_depth_one():
    tree = cart.grow_tree(SEPARABLE_X, SEPARABLE_Y, GrowthConfig(min_node_size=1))
    assert tree.depth == 1
    assert [leaf.counts for leaf in tree.leaves()] == [(2, 0), (0, 2)]


def test_grow_single_label_is_single_leaf():
    tree = cart.grow_tree(SEPARABLE_X, np.ones(4, dtype=bool))
    assert tree.root.is_leaf and tree.root.label is True


def test_grow_empty_raises():
    with pytest.raises(ValueError):
        cart.grow_tree(np.empty((0, 2)), np.empty(0, dtype=bool))


def test_leaf_tie_labels_false():
    assert Node((3, 3), 0).label is False


def test_min_node_size_and_max_depth(rng):
    X = rng.normal(size=(200, 3))
    y = rng.random(200) < 0.5
    tree = cart.grow_tree(X, y, GrowthConfig(min_node_size=20, max_depth=4))
    assert tree.depth <= 4
    for node in tree.nodes():
        if not node.is_leaf:
            assert node.n >= 20


def test_root_split_equals_oracle_on_grown_trees(rng):
    for _ in range(100):
        X, y = random_small_dataset(rng)
        tree = cart.grow_tree(X, y, GrowthConfig(min_node_size=1))
        want = brute_best_split(X, y)
        if want is None:
            assert tree.root.is_leaf
        else:
            assert (tree.root.split.feature, tree.root.split.threshold) == want[:2]


def test_training_routing_reproduces_leaf_counts():
    from courtside.synth import generate

    data = generate(seed=42)
    X, y = data.X, data.labels()
    tree = cart.grow_tree(X, y, feature_names=data.feature_names)
    leaves = tree.leaves()
    assert sum(l.counts[0] for l in leaves) == int((~y).sum())
    assert sum(l.counts[1] for l in leaves) == int(y.sum())
    assert sum(l.errors for l in leaves) == int(np.sum(cart.predict_all(tree, X) != y))


def test_structure_invariants(rng):
    X = rng.normal(size=(120, 4))
    y = X[:, 0] * X[:, 2] > 0
    tree = cart.grow_tree(X, y, GrowthConfig(min_node_size=2))
    for node in tree.nodes():
        if not node.is_leaf:
            assert node.left.depth == node.right.depth == node.depth + 1
            assert node.left.n > 0 and node.right.n > 0
            assert tuple(a + b for a, b in zip(node.left.counts, node.right.counts)) == node.counts


def test_growth_is_deterministic(rng):
    X = rng.normal(size=(80, 5))
    y = rng.random(80) < 0.4
    assert cart.grow_tree(X, y) == cart.grow_tree(X, y)


def _stump():
    split = Split(0, 2.5, 0.0)
    return ClassificationTree(Node((2, 2), 0, split, Node((2, 0), 1), Node((0, 2), 1)), ("x",))


def test_predict_routing():
    tree = _stump()
    assert cart.predict(tree, [1.0]) is False
    assert cart.predict(tree, [2.5]) is True  # equality goes right
    assert cart.predict(tree, {"x": 3.0}) is True
    assert cart.predict_all(tree, np.array([[1.0], [2.5], [9.0]])).tolist() == [False, True, True]


def test_predict_constant_tree():
    tree = ClassificationTree(Node((1, 4), 0), ("x",))
    assert cart.predict_all(tree, np.array([[-5.0], [0.0], [100.0]])).all()


def test_predict_unknown_feature():
    with pytest.raises(KeyError, match="'x'"):
        cart.predict(_stump(), {"y": 1.0})


def _fig_tree():
    """8-leaf tree built from the four playoff routes (own labels in comments)."""
    names = ("oAST", "STL", "AST", "o2P", "TOV", "DRB", "oTOV")
    idx = {n: i for i, n in enumerate(names)}

    def leaf(label):
        return Node((0, 1) if label else (1, 0), 0)

    def split(name, t, left, right):
        return Node((0, 0), 0, Split(idx[name], t, 0.0), left, right)

    right_high_stl = split("AST", 22.5793, split("o2P", 30.311, leaf(True), leaf(False)), leaf(True))
    right_low_stl = split(
        "TOV",
        14.1585,
        split("DRB", 29.9024, leaf(False), split("oTOV", 13.1585, leaf(False), leaf(True))),
        leaf(False),
    )
    root = split("oAST", 20.75, leaf(True), split("STL", 8.0061, right_low_stl, right_high_stl))
    return ClassificationTree(root, names)


def test_decision_paths_of_eight_leaf_tree():
    tree = _fig_tree()
    assert tree.n_leaves == 8
    paths = cart.decision_paths(tree, True)
    assert len(paths) == 4
    assert str(paths[0]) == "oAST < 20.75"
    rendered = {str(p) for p in paths}
    assert "oAST >= 20.75 → STL >= 8.0061 → AST >= 22.5793" in rendered
    assert "oAST >= 20.75 → STL >= 8.0061 → AST < 22.5793 → o2P < 30.311" in rendered
    assert "oAST >= 20.75 → STL < 8.0061 → TOV < 14.1585 → DRB >= 29.9024 → oTOV >= 13.1585" in rendered
    assert len(cart.decision_paths(tree, False)) == 4


def test_decision_paths_single_leaf():
    tree = ClassificationTree(Node((0, 3), 0), ("x",))
    assert cart.decision_paths(tree, True) == [cart.DecisionPath((), True)]
    assert cart.decision_paths(tree, False) == []


def test_decision_path_conditions_hold_for_routed_rows(rng):
    X = rng.normal(size=(100, 3))
    y = X[:, 0] + X[:, 1] > 0
    tree = cart.grow_tree(X, y, feature_names=("a", "b", "c"))
    paths = cart.decision_paths(tree, True) + cart.decision_paths(tree, False)
    assert len(paths) == tree.n_leaves
    for x, pred in zip(X, cart.predict_all(tree, X)):
        row = dict(zip("abc", x))
        matching = [
            p for p in paths
            if all((row[c.feature] < c.threshold) == (c.op == "<") for c in p.conditions)
        ]
        assert len(matching) == 1 and matching[0].label == pred


def test_dot_single_leaf():
    dot = cart.to_dot(ClassificationTree(Node((0, 3), 0), ("x",)))
    (graph,) = pydot.graph_from_dot_data(dot)
    assert len(graph.get_nodes()) - _styling_nodes(graph) == 1


def _styling_nodes(graph):
    return sum(1 for n in graph.get_nodes() if n.get_name() in ("node", "edge", "graph"))


def test_dot_stump_parses():
    (graph,) = pydot.graph_from_dot_data(cart.to_dot(_stump()))
    assert len(graph.get_nodes()) - _styling_nodes(graph) == 3
    assert len(graph.get_edges()) == 2
    assert graph.get_node("n0")[0].get("label") == '"x < 2.5\\nn=4"'


def test_dot_parses_for_grown_tree(rng):
    X = rng.normal(size=(150, 4))
    y = X[:, 0] > 0.2
    tree = cart.grow_tree(X, y)
    (graph,) = pydot.graph_from_dot_data(cart.to_dot(tree))
    assert len(graph.get_edges()) == 2 * (tree.n_leaves - 1)


def test_text_round_trip(rng):
    X = rng.normal(size=(150, 4))
    y = X[:, 0] * X[:, 1] > 0
    tree = cart.grow_tree(X, y, feature_names=("a", "b", "c", "d"))
    assert cart.from_text(cart.to_text(tree)) == tree


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_best_split_oracle_property(data):
    n = data.draw(st.integers(2, 12))
    p = data.draw(st.integers(1, 3))
    X = np.array(data.draw(st.lists(st.lists(st.integers(0, 6), min_size=p, max_size=p), min_size=n, max_size=n)),
                 dtype=float)
    y = np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    got = cart.best_split(X, y)
    want = brute_best_split(X, y)
    assert (got is None) == (want is None)
    if got is not None:
        assert (got.feature, got.threshold) == want[:2]


def test_gini_matches_direct_evaluation():
    for a in range(13):
        for b in range(13 - a):
            assert cart.gini((a, b)) == gini_direct(a, b)
