"""Binary classification trees grown by recursive Gini-minimizing splits.

Labels are booleans (FALSE = 0, TRUE = 1). A split sends rows with
``x[feature] < threshold`` left and ``x[feature] >= threshold`` right;
thresholds are midpoints between consecutive distinct observed values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

# Weighted Gini scores closer than this are ties. Distinct scores on integer
# class counts differ by far more for any realistic node size.
TIE_TOL = 1e-12


def gini(counts: Sequence[int]) -> float:
    """Gini index sum_k p_k (1 - p_k) of a class-count vector; 0 for an empty node."""
    total = sum(counts)
    if total == 0:
        return 0.0
    return sum((c / total) * (1 - c / total) for c in counts)


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gini_after: float


@dataclass(frozen=True)
class Node:
    counts: tuple[int, int]  # (n_false, n_true) of training rows reaching the node
    depth: int
    split: Split | None = None
    left: Node | None = None
    right: Node | None = None

    @property
    def n(self) -> int:
        return self.counts[0] + self.counts[1]

    @property
    def gini(self) -> float:
        return gini(self.counts)

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def label(self) -> bool:
        # majority class; ties go to FALSE
        return self.counts[1] > self.counts[0]

    @property
    def errors(self) -> int:
        """Training rows misclassified if this node were a leaf."""
        return self.counts[0] if self.label else self.counts[1]

    def as_leaf(self) -> "Node":
        return Node(self.counts, self.depth)


@dataclass(frozen=True)
class GrowthConfig:
    min_node_size: int = 5
    max_depth: int = 30

    def __post_init__(self):
        if self.min_node_size < 1:
            raise ValueError("min_node_size must be >= 1")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


@dataclass(frozen=True)
class ClassificationTree:
    root: Node
    feature_names: tuple[str, ...]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def nodes(self) -> Iterator[Node]:
        """Pre-order traversal."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)

    def leaves(self) -> list[Node]:
        return [n for n in self.nodes() if n.is_leaf]

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes()) - self.root.depth


def _default_names(p: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(p))


def best_split(X: np.ndarray, y: np.ndarray, candidates: Sequence[int] | None = None) -> Split | None:
    """Split minimizing |L|/N G_L + |R|/N G_R over the candidate features.

    Ties go to the lowest feature index, then the smallest threshold.
    Returns None for a pure node or when no candidate has two distinct values.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    n = y.size
    n_true = int(y.sum())
    if n == 0 or n_true in (0, n):
        return None
    features = range(X.shape[1]) if candidates is None else sorted(candidates)

    best: tuple[float, int, float] | None = None  # (score, feature, threshold); higher score is better
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        boundary = np.flatnonzero(xs[1:] > xs[:-1])  # split after sorted position i
        if boundary.size == 0:
            continue
        n_left = boundary + 1.0
        t_left = np.cumsum(ys)[boundary].astype(float)
        f_left = n_left - t_left
        n_right = n - n_left
        t_right = n_true - t_left
        f_right = n_right - t_right
        # sum of squared counts over size, per side; maximizing it minimizes weighted Gini
        score = (t_left**2 + f_left**2) / n_left + (t_right**2 + f_right**2) / n_right
        top = score.max()
        i = int(np.flatnonzero(score >= top - TIE_TOL)[0])
        if best is None or top > best[0] + TIE_TOL:
            lo, hi = xs[boundary[i]], xs[boundary[i] + 1]
            threshold = (lo + hi) / 2
            if not lo < threshold <= hi:
                threshold = hi
            best = (float(top), f, float(threshold))
    if best is None:
        return None
    score, f, threshold = best
    return Split(feature=f, threshold=threshold, gini_after=(n - score) / n)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    config: GrowthConfig | None = None,
    feature_names: Sequence[str] | None = None,
    candidates: Callable[[], Sequence[int]] | None = None,
) -> ClassificationTree:
    """Greedy top-down growth.

    A node becomes a leaf when it is pure, holds fewer than
    ``config.min_node_size`` rows, sits at ``config.max_depth``, or has no
    valid split. ``candidates``, when given, is called once per node to draw
    the features that node may split on.
    """
    config = config or GrowthConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError(f"X shape {X.shape} does not match {y.size} labels")
    if y.size == 0:
        raise ValueError("cannot grow a tree on an empty training set")
    names = tuple(feature_names) if feature_names is not None else _default_names(X.shape[1])
    if len(names) != X.shape[1]:
        raise ValueError("feature_names length does not match X")

    def build(idx: np.ndarray, depth: int) -> Node:
        yy = y[idx]
        n_true = int(yy.sum())
        counts = (idx.size - n_true, n_true)
        if n_true in (0, idx.size) or idx.size < config.min_node_size or depth >= config.max_depth:
            return Node(counts, depth)
        cand = candidates() if candidates is not None else None
        split = best_split(X[idx], yy, cand)
        if split is None:
            return Node(counts, depth)
        go_left = X[idx, split.feature] < split.threshold
        return Node(
            counts,
            depth,
            split,
            build(idx[go_left], depth + 1),
            build(idx[~go_left], depth + 1),
        )

    return ClassificationTree(build(np.arange(y.size), 0), names)


def _leaf_for(tree: ClassificationTree, x: Sequence[float]) -> Node:
    node = tree.root
    while not node.is_leaf:
        node = node.left if x[node.split.feature] < node.split.threshold else node.right
    return node


def _row_vector(tree: ClassificationTree, row) -> Sequence[float]:
    if isinstance(row, Mapping):
        missing = [f for f in tree.feature_names if f not in row]
        if missing:
            raise KeyError(f"row has no value for feature {missing[0]!r}")
        return [row[f] for f in tree.feature_names]
    x = np.asarray(row, dtype=float)
    if x.shape != (tree.n_features,):
        raise ValueError(f"expected {tree.n_features} feature values, got shape {x.shape}")
    return x


def predict(tree: ClassificationTree, row) -> bool:
    """Label for one row, given as a feature vector or a name -> value mapping."""
    return _leaf_for(tree, _row_vector(tree, row)).label


def predict_all(tree: ClassificationTree, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != tree.n_features:
        raise ValueError(f"expected an (n, {tree.n_features}) matrix, got shape {X.shape}")
    out = np.empty(X.shape[0], dtype=bool)
    stack = [(tree.root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if node.is_leaf:
            out[idx] = node.label
            continue
        go_left = X[idx, node.split.feature] < node.split.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))
    return out


@dataclass(frozen=True)
class Condition:
    feature: str
    op: str  # "<" or ">="
    threshold: float

    def __str__(self) -> str:
        return f"{self.feature} {self.op} {self.threshold:.6g}"


@dataclass(frozen=True)
class DecisionPath:
    conditions: tuple[Condition, ...]
    label: bool

    def __str__(self) -> str:
        if not self.conditions:
            return "(always)"
        return " → ".join(str(c) for c in self.conditions)


def decision_paths(tree: ClassificationTree, target: bool = True) -> list[DecisionPath]:
    """Every root-to-leaf path ending in a leaf labeled ``target``, left branches first."""
    paths: list[DecisionPath] = []

    def walk(node: Node, conds: tuple[Condition, ...]) -> None:
        if node.is_leaf:
            if node.label == target:
                paths.append(DecisionPath(conds, node.label))
            return
        name = tree.feature_names[node.split.feature]
        t = node.split.threshold
        walk(node.left, conds + (Condition(name, "<", t),))
        walk(node.right, conds + (Condition(name, ">=", t),))

    walk(tree.root, ())
    return paths


def _label_str(label: bool) -> str:
    return "TRUE" if label else "FALSE"


def to_dot(tree: ClassificationTree, name: str = "tree") -> str:
    """Graphviz DOT. Node ids are pre-order indices."""
    lines = [f"digraph {name} {{", '  node [shape=box, fontname="Helvetica"];']
    counter = 0

    def emit(node: Node) -> int:
        nonlocal counter
        nid = counter
        counter += 1
        if node.is_leaf:
            label = f"{_label_str(node.label)}\\n[{node.counts[0]}, {node.counts[1]}]"
            lines.append(f'  n{nid} [label="{label}", style=rounded];')
            return nid
        feature = tree.feature_names[node.split.feature]
        lines.append(f'  n{nid} [label="{feature} < {node.split.threshold:.6g}\\nn={node.n}"];')
        left = emit(node.left)
        right = emit(node.right)
        lines.append(f'  n{nid} -> n{left} [label="yes"];')
        lines.append(f'  n{nid} -> n{right} [label="no"];')
        return nid

    emit(tree.root)
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_text(tree: ClassificationTree) -> str:
    """Line-oriented pre-order dump, one node per line.

    ``<depth> split <feature> <threshold> <n_false> <n_true>`` or
    ``<depth> leaf <n_false> <n_true> <label>``; thresholds use ``repr``.
    """
    lines = ["features " + " ".join(tree.feature_names)]
    for node in tree.nodes():
        if node.is_leaf:
            lines.append(f"{node.depth} leaf {node.counts[0]} {node.counts[1]} {_label_str(node.label)}")
        else:
            feature = tree.feature_names[node.split.feature]
            lines.append(
                f"{node.depth} split {feature} {node.split.threshold!r} {node.counts[0]} {node.counts[1]}"
                f" {node.split.gini_after!r}"
            )
    return "\n".join(lines) + "\n"


def from_text(text: str) -> ClassificationTree:
    lines = text.strip().splitlines()
    if not lines or not lines[0].startswith("features"):
        raise ValueError("missing features header")
    names = tuple(lines[0].split()[1:])
    index = {n: i for i, n in enumerate(names)}
    it = iter(lines[1:])

    def read() -> Node:
        parts = next(it).split()
        depth, kind = int(parts[0]), parts[1]
        if kind == "leaf":
            return Node((int(parts[2]), int(parts[3])), depth)
        split = Split(index[parts[2]], float(parts[3]), float(parts[6]))
        left = read()
        right = read()
        return Node((int(parts[4]), int(parts[5])), depth, split, left, right)

    return ClassificationTree(read(), names)
