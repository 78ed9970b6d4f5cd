import math

import mpmath
import numpy as np
import pytest

from courtside import mlp
from courtside.errors import NumericalError
from courtside.mlp import Mlp, MlpConfig
from oracles import mp_central_differences

XOR_X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
XOR_Y = np.array([False, True, True, False])
XOR_CFG = MlpConfig(hidden=4, decay=0.0, learning_rate=0.5, max_iters=20_000, tolerance=0.0, seed=1)


def test_logistic_basics():
    assert mlp.logistic(0.0) == 0.5
    xs = np.linspace(-30, 30, 601)
    assert np.max(np.abs(mlp.logistic(-xs) - (1 - mlp.logistic(xs)))) <= 1e-15


def test_logistic_tails():
    mpmath.mp.dps = 50
    exact = 1 / (1 + mpmath.exp(-709))
    v = mlp.logistic(709.0)
    assert math.isfinite(v) and v < 1.0
    assert abs(mpmath.mpf(v) - exact) <= 2.0**-53
    for x in (-1000.0, -709.0, 1000.0):
        v = mlp.logistic(x)
        assert 0.0 < v < 1.0


def test_init_weights_deterministic_and_ranged():
    a = mlp.init_weights(5, 3, 1, seed=4, init_range=0.5)
    b = mlp.init_weights(5, 3, 1, seed=4, init_range=0.5)
    assert a == b
    assert a.W1.shape == (3, 6) and a.W2.shape == (1, 4)
    assert np.all(np.abs(a.W1) <= 0.5)


def test_init_mean_near_zero():
    net = mlp.init_weights(999, 100, 1, seed=0, init_range=0.5)
    assert abs(net.W1.mean()) < 0.01


def test_zero_range_gives_half_output():
    net = mlp.init_weights(3, 2, 1, seed=0, init_range=0.0)
    assert mlp.forward(net, [1.0, -2.0, 3.0]).output[0] == 0.5
    assert mlp.predict_mlp(net, [0.0, 0.0, 0.0]) is True


def test_init_nonpositive_dims():
    with pytest.raises(ValueError):
        mlp.init_weights(0, 2)


def test_forward_by_hand():
    W1 = np.array([[0.1, -0.2, 0.05], [0.3, 0.4, -0.1]])
    W2 = np.array([[0.7, -0.5, 0.2]])
    net = Mlp(W1, W2)
    x = [1.5, -0.5]
    h1 = 1 / (1 + math.exp(-(0.1 * 1.5 - 0.2 * -0.5 + 0.05)))
    h2 = 1 / (1 + math.exp(-(0.3 * 1.5 + 0.4 * -0.5 - 0.1)))
    o = 1 / (1 + math.exp(-(0.7 * h1 - 0.5 * h2 + 0.2)))
    act = mlp.forward(net, x)
    assert act.hidden_output == pytest.approx([h1, h2], abs=1e-12)
    assert act.output[0] == pytest.approx(o, abs=1e-12)


def test_forward_dimension_mismatch():
    with pytest.raises(ValueError):
        mlp.forward(mlp.init_weights(3, 2), [1.0, 2.0])


def test_outputs_in_open_interval(rng):
    net = mlp.init_weights(4, 6, seed=2, init_range=5.0)
    out = mlp.predict_proba(net, 50 * rng.normal(size=(200, 4)))
    assert np.all((out > 0) & (out < 1))


def test_loss_values():
    net = mlp.init_weights(2, 3, init_range=0.0)
    assert mlp.loss(net, XOR_X, XOR_Y, 0.0) == pytest.approx(math.log(2), abs=1e-15)
    W1 = np.zeros((1, 2))
    W2 = np.array([[0.0, 40.0]])
    confident = Mlp(W1, W2)
    assert mlp.loss(confident, [[0.0]], [True], 0.0) < 1e-11  # log clamp floor is 1e-12
    lam = 0.3
    net = mlp.init_weights(2, 3, seed=1)
    direct = lam * (np.sum(net.W1**2) + np.sum(net.W2**2))
    assert mlp.loss(net, XOR_X, XOR_Y, lam) - mlp.loss(net, XOR_X, XOR_Y, 0.0) == pytest.approx(direct, abs=1e-14)


def rel_err(a, b):
    """Componentwise |a - b| / max(|a|, |b|), zero where both vanish."""
    scale = np.maximum(np.abs(a), np.abs(b))
    return np.divide(np.abs(a - b), scale, out=np.zeros_like(scale), where=scale > 0)


def check_gradient(net, X, y, lam, kind="entropy"):
    analytic = mlp.gradient(net, X, y, lam, kind)
    numeric = mp_central_differences(net.W1, net.W2, X, y, lam, kind, h=1e-5)
    return max(rel_err(a, n).max() for a, n in zip(analytic, numeric))


@pytest.mark.parametrize("kind", ["entropy", "squared"])
def test_gradient_matches_finite_differences(rng, kind):
    for k in range(20):
        net = mlp.init_weights(3, 4, 1, seed=k, init_range=1.0)
        n = int(rng.integers(1, 10))
        X = rng.normal(size=(n, 3))
        y = rng.random(n) < 0.5
        assert check_gradient(net, X, y, [0.0, 1e-7, 1e-2][k % 3], kind) < 1e-6


def test_gradient_zero_when_output_matches_target():
    net = mlp.init_weights(2, 3, init_range=0.0)  # output 0.5 everywhere
    g1, g2 = mlp.gradient(net, XOR_X, np.full(4, 0.5), 0.0)
    assert np.all(g1 == 0) and np.all(g2 == 0)


def test_gradient_linear_in_decay(rng):
    net = mlp.init_weights(3, 4, seed=3)
    X = rng.normal(size=(6, 3))
    y = rng.random(6) < 0.5
    a = 0.01
    g0, ga, g2a = (mlp.gradient(net, X, y, lam) for lam in (0.0, a, 2 * a))
    for i in range(2):
        assert np.allclose(g2a[i] - ga[i], ga[i] - g0[i], atol=1e-12, rtol=0)


def test_xor_learned():
    result = mlp.train(XOR_X, XOR_Y, XOR_CFG)
    assert result.iterations <= 20_000
    assert np.array_equal(mlp.predict_mlp_all(result.net, XOR_X), XOR_Y)


def test_loss_decreases_with_small_steps():
    result = mlp.train(XOR_X, XOR_Y, MlpConfig(hidden=4, decay=0.0, learning_rate=1e-3, max_iters=100, tolerance=0.0))
    assert result.losses[100] < result.losses[0]


def test_decay_shrinks_weights():
    plain = mlp.train(XOR_X, XOR_Y, XOR_CFG).net
    decayed = mlp.train(XOR_X, XOR_Y, MlpConfig(**{**XOR_CFG.__dict__, "decay": 1e-2})).net
    assert decayed.weight_norm2() <= plain.weight_norm2()


def test_infinite_tolerance_takes_one_step():
    result = mlp.train(XOR_X, XOR_Y, MlpConfig(hidden=2, tolerance=math.inf))
    assert result.iterations == 1


def test_training_is_bitwise_deterministic():
    cfg = MlpConfig(hidden=3, max_iters=300, seed=9)
    a = mlp.train(XOR_X, XOR_Y, cfg).net
    b = mlp.train(XOR_X, XOR_Y, cfg).net
    assert a.W1.tobytes() == b.W1.tobytes() and a.W2.tobytes() == b.W2.tobytes()


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_raises_naming_iteration():
    X = np.array([[1e150, -1e150], [-1e150, 1e150]])
    with pytest.raises(NumericalError, match="iteration 1"):
        mlp.train(X, [True, False], MlpConfig(hidden=2, learning_rate=1e200, init_range=1.0))


def test_predict_threshold():
    net = mlp.init_weights(2, 2, seed=3)
    assert not any(mlp.predict_mlp(net, x, threshold=1.0) for x in XOR_X)


def test_model_text_round_trip():
    net = mlp.init_weights(26, 20, seed=5)
    again = mlp.from_text(mlp.to_text(net))
    assert again.W1.tobytes() == net.W1.tobytes() and again.W2.tobytes() == net.W2.tobytes()
    assert mlp.to_text(net).splitlines()[0] == "26 20 1"


def test_grid_single_cell():
    res = mlp.cv_grid_search(XOR_X, XOR_Y, [3], [1e-3], folds=2, seed=0, base=MlpConfig(max_iters=10))
    assert (res.best.hidden, res.best.decay) == (3, 1e-3)
    assert len(res.cells) == 1


def test_grid_separable_prefers_smallest_network():
    rng = np.random.default_rng(4)
    X = np.vstack([rng.normal(-2, 0.3, size=(20, 2)), rng.normal(2, 0.3, size=(20, 2))])
    y = np.array([False] * 20 + [True] * 20)
    res = mlp.cv_grid_search(X, y, [6, 2, 4], [1e-7, 1e-4], folds=4, seed=1,
                             base=MlpConfig(learning_rate=0.5, max_iters=400))
    assert all(err == 0 for _, _, err in res.cells)
    assert (res.best.hidden, res.best.decay) == (2, 1e-4)


def test_grid_fold_range():
    with pytest.raises(ValueError):
        mlp.cv_grid_search(XOR_X, XOR_Y, [2], [0.0], folds=1)


@pytest.mark.parametrize("kw", [{"hidden": 0}, {"decay": -1.0}, {"learning_rate": 0.0}, {"loss": "hinge"}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        MlpConfig(**kw)
