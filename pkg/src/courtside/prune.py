"""Weakest-link cost-complexity pruning and cross-validated tree-size selection."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from courtside.cart import ClassificationTree, GrowthConfig, Node, grow_tree, predict_all


@dataclass(frozen=True)
class PruneStep:
    alpha: float
    tree: ClassificationTree
    n_leaves: int


@dataclass(frozen=True)
class PruneSequence:
    steps: tuple[PruneStep, ...]
    full_tree: ClassificationTree | None = None  # the unpruned input

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i) -> PruneStep:
        return self.steps[i]

    @property
    def sizes(self) -> list[int]:
        return [s.n_leaves for s in self.steps]

    @property
    def candidate_sizes(self) -> list[int]:
        """Step sizes, led by the unpruned size when free collapses shrank the first step."""
        sizes = self.sizes
        if self.full_tree is not None and self.full_tree.n_leaves > sizes[0]:
            return [self.full_tree.n_leaves] + sizes
        return sizes


def _leaf_stats(node: Node) -> tuple[int, int]:
    """(misclassified training rows over the subtree's leaves, number of leaves)."""
    if node.is_leaf:
        return node.errors, 1
    le, ll = _leaf_stats(node.left)
    re, rl = _leaf_stats(node.right)
    return le + re, ll + rl


def _weakest_alpha(node: Node) -> Fraction | None:
    """Smallest (R(t) - R(T_t)) / (|T_t| - 1) over the internal nodes below ``node``."""
    if node.is_leaf:
        return None
    err, leaves = _leaf_stats(node)
    best = Fraction(node.errors - err, leaves - 1)
    for child in (node.left, node.right):
        a = _weakest_alpha(child)
        if a is not None and a < best:
            best = a
    return best


def _collapse(node: Node, alpha: Fraction) -> Node:
    if node.is_leaf:
        return node
    err, leaves = _leaf_stats(node)
    if Fraction(node.errors - err, leaves - 1) == alpha:
        return node.as_leaf()
    return Node(node.counts, node.depth, node.split, _collapse(node.left, alpha), _collapse(node.right, alpha))


def weakest_link_sequence(tree: ClassificationTree) -> PruneSequence:
    """Nested subtrees from the smallest alpha-0 optimum down to the root leaf.

    Splits that do not reduce training error are collapsed first, giving the
    alpha = 0 step (the input tree itself when it has no such splits). Each
    later round collapses every internal node whose error increase per
    removed leaf is minimal; a round whose alpha repeats the previous one
    overwrites that step with the smaller tree, so recorded alphas increase
    strictly.
    """
    current = tree
    while not current.root.is_leaf and _weakest_alpha(current.root) == 0:
        current = ClassificationTree(_collapse(current.root, Fraction(0)), tree.feature_names)
    steps = [PruneStep(0.0, current, current.n_leaves)]
    last_alpha = Fraction(0)
    while not current.root.is_leaf:
        alpha = _weakest_alpha(current.root)
        current = ClassificationTree(_collapse(current.root, alpha), tree.feature_names)
        step = PruneStep(float(alpha), current, current.n_leaves)
        if alpha > last_alpha:
            steps.append(step)
            last_alpha = alpha
        else:
            steps[-1] = step
    return PruneSequence(tuple(steps), tree)


def prune_to_size(seq: PruneSequence, n_leaves: int) -> ClassificationTree:
    """The sequence subtree with the most leaves not exceeding ``n_leaves``.

    Asking for at least the unpruned leaf count returns the unpruned tree.
    """
    if len(seq) == 0:
        raise ValueError("empty prune sequence")
    if n_leaves < 1:
        raise ValueError("n_leaves must be >= 1")
    if seq.full_tree is not None and n_leaves >= seq.full_tree.n_leaves:
        return seq.full_tree
    for step in seq:
        if step.n_leaves <= n_leaves:
            return step.tree
    return seq[-1].tree


def is_pruned_from(sub: Node | ClassificationTree, full: Node | ClassificationTree) -> bool:
    """True if ``sub`` is ``full`` with zero or more internal nodes collapsed to leaves."""
    if isinstance(sub, ClassificationTree):
        sub = sub.root
    if isinstance(full, ClassificationTree):
        full = full.root
    if sub.counts != full.counts or sub.depth != full.depth:
        return False
    if sub.is_leaf:
        return True
    if full.is_leaf or sub.split != full.split:
        return False
    return is_pruned_from(sub.left, full.left) and is_pruned_from(sub.right, full.right)


@dataclass(frozen=True)
class CvCurve:
    sizes: tuple[int, ...]
    errors: tuple[int, ...]  # held-out misclassifications summed over folds
    chosen_size: int
    folds: int
    seed: int
    sequence: PruneSequence | None = field(default=None, compare=False, repr=False)

    def to_csv(self) -> str:
        return "n_leaves,cv_error\n" + "".join(f"{s},{e}\n" for s, e in zip(self.sizes, self.errors))


def fold_assignment(n: int, folds: int, seed: int) -> np.ndarray:
    """Fold index per row: a seeded shuffle dealt round-robin into ``folds`` parts."""
    perm = np.random.default_rng(seed).permutation(n)
    fold_of = np.empty(n, dtype=int)
    fold_of[perm] = np.arange(n) % folds
    return fold_of


def cv_select_size(
    X: np.ndarray,
    y: np.ndarray,
    folds: int = 10,
    seed: int = 0,
    config: GrowthConfig | None = None,
    feature_names: Sequence[str] | None = None,
) -> CvCurve:
    """Choose a leaf count by K-fold cross-validated misclassification.

    Candidate sizes come from the prune sequence of the tree grown on all
    rows. Each fold grows its own tree, prunes it to each candidate size and
    counts held-out errors. The smallest size with the fewest errors wins.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    n = y.size
    if folds < 2 or folds > n:
        raise ValueError(f"folds must lie in [2, {n}], got {folds}")
    full = weakest_link_sequence(grow_tree(X, y, config, feature_names))
    sizes = full.candidate_sizes
    fold_of = fold_assignment(n, folds, seed)
    errors = np.zeros(len(sizes), dtype=int)
    for k in range(folds):
        held = fold_of == k
        seq = weakest_link_sequence(grow_tree(X[~held], y[~held], config, feature_names))
        for j, size in enumerate(sizes):
            pred = predict_all(prune_to_size(seq, size), X[held])
            errors[j] += int(np.sum(pred != y[held]))
    best = errors.min()
    chosen = min(s for s, e in zip(sizes, errors) if e == best)
    return CvCurve(
        sizes=tuple(sizes),
        errors=tuple(int(e) for e in errors),
        chosen_size=chosen,
        folds=folds,
        seed=seed,
        sequence=full,
    )
