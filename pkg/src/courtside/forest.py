"""Random forests: bootstrap resampling, per-split feature subsets, majority vote.

Each tree gets its own generator seeded from ``(seed, tree_index)``, which
drives both its bootstrap draw and the feature subset at every node. Trees
are therefore independent of growth order and can be grown in any order or
in parallel with identical results.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from courtside.cart import ClassificationTree, GrowthConfig, grow_tree, predict_all


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 500
    mtry: int | None = None  # None -> floor(sqrt(p))
    seed: int = 0
    growth: GrowthConfig = field(default_factory=lambda: GrowthConfig(min_node_size=1))
    bootstrap: bool = True  # False grows every tree on the training set as given

    def resolved_mtry(self, p: int) -> int:
        m = self.mtry if self.mtry is not None else max(1, math.isqrt(p))
        if not 1 <= m <= p:
            raise ValueError(f"mtry must lie in [1, {p}], got {m}")
        return m

    def validate(self, p: int) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        self.resolved_mtry(p)


@dataclass(frozen=True)
class Forest:
    trees: tuple[ClassificationTree, ...]
    importance: np.ndarray = field(compare=False)  # accumulated Gini decrease per feature
    config: ForestConfig
    feature_names: tuple[str, ...]

    def __eq__(self, other):
        return (
            isinstance(other, Forest)
            and self.trees == other.trees
            and self.config == other.config
            and np.array_equal(self.importance, other.importance)
        )


def _tree_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def bootstrap_indices(n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ValueError("cannot bootstrap an empty training set")
    return rng.integers(0, n, size=n)


def bootstrap_sample(X: np.ndarray, y: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """N rows drawn with replacement, deterministic in ``seed``."""
    idx = bootstrap_indices(len(y), np.random.default_rng(seed))
    return np.asarray(X)[idx], np.asarray(y)[idx]


def gini_decrease(tree: ClassificationTree) -> np.ndarray:
    """Per-feature sum over internal nodes of (n_node / N) * (G_node - weighted child G)."""
    out = np.zeros(tree.n_features)
    total = tree.root.n
    for node in tree.nodes():
        if node.is_leaf:
            continue
        drop = node.gini - node.split.gini_after
        out[node.split.feature] += node.n / total * max(drop, 0.0)
    return out


def _grow_one(X, y, config: ForestConfig, feature_names, index: int) -> ClassificationTree:
    rng = _tree_rng(config.seed, index)
    p = X.shape[1]
    mtry = config.resolved_mtry(p)
    if config.bootstrap:
        idx = bootstrap_indices(len(y), rng)
        X, y = X[idx], y[idx]

    def candidates():
        return np.sort(rng.choice(p, size=mtry, replace=False))

    return grow_tree(X, y, config.growth, feature_names, candidates)


def grow_forest(
    X: np.ndarray,
    y: np.ndarray,
    config: ForestConfig | None = None,
    feature_names: Sequence[str] | None = None,
    n_jobs: int = 1,
) -> Forest:
    config = config or ForestConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    if y.size == 0:
        raise ValueError("cannot grow a forest on an empty training set")
    config.validate(X.shape[1])
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(X.shape[1]))
    indices = range(config.n_trees)
    if n_jobs > 1:
        with ProcessPoolExecutor(n_jobs) as pool:
            trees = list(pool.map(_grow_one, *zip(*((X, y, config, names, i) for i in indices))))
    else:
        trees = [_grow_one(X, y, config, names, i) for i in indices]
    importance = np.zeros(X.shape[1])
    for t in trees:
        importance += gini_decrease(t)
    return Forest(tuple(trees), importance, config, names)


def votes(forest: Forest, X: np.ndarray) -> np.ndarray:
    """Number of TRUE votes per row."""
    X = np.asarray(X, dtype=float)
    count = np.zeros(X.shape[0], dtype=int)
    for t in forest.trees:
        count += predict_all(t, X)
    return count


def predict_forest_all(forest: Forest, X: np.ndarray) -> np.ndarray:
    # strict majority for TRUE; an even split goes to FALSE
    return 2 * votes(forest, X) > len(forest.trees)


def predict_forest(forest: Forest, row: Sequence[float]) -> bool:
    x = np.asarray(row, dtype=float)
    if x.shape != (len(forest.feature_names),):
        raise ValueError(f"expected {len(forest.feature_names)} feature values, got shape {x.shape}")
    return bool(predict_forest_all(forest, x[None, :])[0])


@dataclass(frozen=True)
class ImportanceEntry:
    feature: str
    gini_decrease: float
    percent: float


def importance_report(forest: Forest) -> list[ImportanceEntry]:
    """Features by descending accumulated Gini decrease, ties in canonical order."""
    imp = forest.importance
    total = float(imp.sum())
    order = sorted(range(len(imp)), key=lambda i: (-imp[i], i))
    return [
        ImportanceEntry(
            forest.feature_names[i],
            float(imp[i]),
            100.0 * float(imp[i]) / total if total > 0 else 0.0,
        )
        for i in order
    ]


def importance_csv(entries: Sequence[ImportanceEntry]) -> str:
    lines = ["feature,gini_decrease,percent"]
    lines += [f"{e.feature},{e.gini_decrease!r},{e.percent!r}" for e in entries]
    return "\n".join(lines) + "\n"
