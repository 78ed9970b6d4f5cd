"""Single-hidden-layer perceptron with logistic units and weight decay.

Weights live in two matrices with the bias as the last column:
``W1`` is (hidden, p + 1) and ``W2`` is (q, hidden + 1). Training is
full-batch gradient descent on mean binary cross-entropy (or mean squared
error) plus ``decay * sum(w**2)`` over every weight, biases included.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from courtside.errors import NumericalError
from courtside.prune import fold_assignment

_EPS = 1e-12
_ONE_BELOW = np.nextafter(1.0, 0.0)
_TINY = np.nextafter(0.0, 1.0)


def logistic(x):
    """1 / (1 + exp(-x)) evaluated without overflow, clipped into the open interval (0, 1)."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    s = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    s = np.clip(s, _TINY, _ONE_BELOW)
    return s if s.ndim else float(s)


@dataclass(frozen=True, eq=False)
class Mlp:
    W1: np.ndarray
    W2: np.ndarray

    @property
    def p(self) -> int:
        return self.W1.shape[1] - 1

    @property
    def h(self) -> int:
        return self.W1.shape[0]

    @property
    def q(self) -> int:
        return self.W2.shape[0]

    def __post_init__(self):
        if self.W2.shape[1] != self.W1.shape[0] + 1:
            raise ValueError(f"W2 shape {self.W2.shape} does not fit W1 shape {self.W1.shape}")
        if not (np.all(np.isfinite(self.W1)) and np.all(np.isfinite(self.W2))):
            raise NumericalError("network weights must be finite")

    def __eq__(self, other):
        return isinstance(other, Mlp) and np.array_equal(self.W1, other.W1) and np.array_equal(self.W2, other.W2)

    def weight_norm2(self) -> float:
        return float(np.sum(self.W1**2) + np.sum(self.W2**2))


@dataclass(frozen=True)
class MlpConfig:
    hidden: int = 20
    decay: float = 1e-7
    learning_rate: float = 0.1
    max_iters: int = 2000
    tolerance: float = 1e-9
    seed: int = 0
    init_range: float = 0.5
    loss: str = "entropy"  # or "squared"

    def __post_init__(self):
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")
        if self.decay < 0 or self.tolerance < 0 or self.init_range < 0:
            raise ValueError("decay, tolerance and init_range must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.loss not in ("entropy", "squared"):
            raise ValueError(f"unknown loss {self.loss!r}")


@dataclass(frozen=True)
class Activations:
    hidden_input: np.ndarray
    hidden_output: np.ndarray
    output_input: np.ndarray
    output: np.ndarray


def init_weights(p: int, h: int, q: int = 1, seed: int = 0, init_range: float = 0.5) -> Mlp:
    if min(p, h, q) < 1:
        raise ValueError("network dimensions must be positive")
    rng = np.random.default_rng(seed)
    W1 = rng.uniform(-init_range, init_range, size=(h, p + 1))
    W2 = rng.uniform(-init_range, init_range, size=(q, h + 1))
    return Mlp(W1, W2)


def _with_bias(A: np.ndarray) -> np.ndarray:
    return np.hstack([A, np.ones((A.shape[0], 1))])


def forward_batch(net: Mlp, X: np.ndarray) -> Activations:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != net.p:
        raise ValueError(f"expected inputs with {net.p} columns, got shape {X.shape}")
    I1 = _with_bias(X) @ net.W1.T
    O1 = logistic(I1)
    I2 = _with_bias(O1) @ net.W2.T
    return Activations(I1, O1, I2, logistic(I2))


def forward(net: Mlp, x: Sequence[float]) -> Activations:
    x = np.asarray(x, dtype=float)
    if x.shape != (net.p,):
        raise ValueError(f"expected {net.p} inputs, got shape {x.shape}")
    a = forward_batch(net, x[None, :])
    return Activations(a.hidden_input[0], a.hidden_output[0], a.output_input[0], a.output[0])


def _targets(y, q: int) -> np.ndarray:
    Y = np.asarray(y, dtype=float)
    return Y.reshape(-1, q)


def _loss_and_gradient(W1, W2, Xb, Y, decay, kind):
    """Loss and (dW1, dW2) from one forward pass; ``Xb`` already carries the bias column."""
    n = Xb.shape[0]
    O1 = logistic(Xb @ W1.T)
    H = _with_bias(O1)
    O = logistic(H @ W2.T)
    if kind == "entropy":
        o = np.clip(O, _EPS, 1 - _EPS)
        data = -np.sum(Y * np.log(o) + (1 - Y) * np.log(1 - o)) / n
        delta2 = (O - Y) / n
    else:
        data = np.sum((O - Y) ** 2) / n
        delta2 = 2 * (O - Y) * O * (1 - O) / n
    value = float(data + decay * (np.sum(W1**2) + np.sum(W2**2)))
    dW2 = delta2.T @ H
    delta1 = (delta2 @ W2[:, :-1]) * O1 * (1 - O1)
    dW1 = delta1.T @ Xb
    return value, dW1 + 2 * decay * W1, dW2 + 2 * decay * W2


def _batch(net: Mlp, X, y):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != net.p:
        raise ValueError(f"expected inputs with {net.p} columns, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    return _with_bias(X), _targets(y, net.q)


def loss(net: Mlp, X: np.ndarray, y, decay: float = 0.0, kind: str = "entropy") -> float:
    """Mean cross-entropy (or squared error) plus ``decay * sum(w**2)``.

    Outputs are clamped to [1e-12, 1 - 1e-12] before taking logs.
    """
    Xb, Y = _batch(net, X, y)
    return _loss_and_gradient(net.W1, net.W2, Xb, Y, decay, kind)[0]


def gradient(net: Mlp, X: np.ndarray, y, decay: float = 0.0, kind: str = "entropy") -> tuple[np.ndarray, np.ndarray]:
    """Backpropagated gradient of :func:`loss` as (dW1, dW2)."""
    Xb, Y = _batch(net, X, y)
    _, g1, g2 = _loss_and_gradient(net.W1, net.W2, Xb, Y, decay, kind)
    return g1, g2


@dataclass(frozen=True, eq=False)
class TrainResult:
    net: Mlp
    losses: list[float]  # losses[0] is the initial loss, then one per descent step

    @property
    def iterations(self) -> int:
        return len(self.losses) - 1


def train(X: np.ndarray, y, config: MlpConfig | None = None) -> TrainResult:
    """Full-batch gradient descent from :func:`init_weights`.

    Stops after ``max_iters`` steps or once successive losses differ by less
    than ``tolerance``. Inputs should already be standardized.
    """
    config = config or MlpConfig()
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training set must be a non-empty matrix")
    Y = _targets(y, 1)
    net = init_weights(X.shape[1], config.hidden, Y.shape[1], config.seed, config.init_range)
    Xb = _with_bias(X)
    W1, W2 = net.W1, net.W2
    prev, g1, g2 = _loss_and_gradient(W1, W2, Xb, Y, config.decay, config.loss)
    losses = [prev]
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, config.max_iters + 1):
            W1 = W1 - config.learning_rate * g1
            W2 = W2 - config.learning_rate * g2
            if not (np.all(np.isfinite(W1)) and np.all(np.isfinite(W2))):
                raise NumericalError(f"weights became non-finite at iteration {it}")
            cur, g1, g2 = _loss_and_gradient(W1, W2, Xb, Y, config.decay, config.loss)
            if not math.isfinite(cur):
                raise NumericalError(f"loss became non-finite at iteration {it}")
            losses.append(cur)
            if abs(cur - prev) < config.tolerance:
                break
            prev = cur
    return TrainResult(Mlp(W1, W2), losses)


def predict_proba(net: Mlp, X: np.ndarray) -> np.ndarray:
    return forward_batch(net, X).output[:, 0]


def predict_mlp(net: Mlp, x: Sequence[float], threshold: float = 0.5) -> bool:
    return bool(forward(net, x).output[0] >= threshold)


def predict_mlp_all(net: Mlp, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    return predict_proba(net, X) >= threshold


@dataclass(frozen=True)
class GridResult:
    best: MlpConfig
    cells: tuple[tuple[int, float, float], ...]  # (hidden, decay, mean held-out error rate)

    def to_csv(self) -> str:
        return "hidden,decay,cv_error\n" + "".join(f"{h},{d!r},{e!r}\n" for h, d, e in self.cells)


def cv_grid_search(
    X: np.ndarray,
    y,
    hidden: Iterable[int],
    decay: Iterable[float],
    folds: int = 10,
    seed: int = 0,
    base: MlpConfig | None = None,
) -> GridResult:
    """K-fold CV over hidden-size x decay.

    Error is the held-out misclassification rate at threshold 0.5 pooled over
    folds. Ties prefer fewer hidden nodes, then larger decay.
    """
    base = base or MlpConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    n = y.size
    if folds < 2 or folds > n:
        raise ValueError(f"folds must lie in [2, {n}], got {folds}")
    grid = list(itertools.product(hidden, decay))
    if not grid:
        raise ValueError("empty grid")
    fold_of = fold_assignment(n, folds, seed)
    cells = []
    wrong_counts = []
    for h, lam in grid:
        cfg = replace(base, hidden=h, decay=lam)
        wrong = 0
        for k in range(folds):
            held = fold_of == k
            net = train(X[~held], y[~held], cfg).net
            wrong += int(np.sum(predict_mlp_all(net, X[held]) != y[held]))
        wrong_counts.append(wrong)
        cells.append((h, lam, wrong / n))
    best_i = min(range(len(grid)), key=lambda i: (wrong_counts[i], grid[i][0], -grid[i][1]))
    h, lam = grid[best_i]
    return GridResult(replace(base, hidden=h, decay=lam), tuple(cells))


def to_text(net: Mlp) -> str:
    """Header ``p h q``, then the rows of W1, then the rows of W2; floats as repr."""
    lines = [f"{net.p} {net.h} {net.q}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in net.W1]
    lines += [" ".join(repr(float(v)) for v in row) for row in net.W2]
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Mlp:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    p, h, q = (int(v) for v in lines[0].split())
    body = [[float(v) for v in ln.split()] for ln in lines[1:]]
    if len(body) != h + q:
        raise ValueError(f"expected {h + q} weight rows, found {len(body)}")
    W1 = np.array(body[:h], dtype=float).reshape(h, p + 1)
    W2 = np.array(body[h:], dtype=float).reshape(q, h + 1)
    return Mlp(W1, W2)
