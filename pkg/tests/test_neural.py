import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from altcite.errors import FeatureCountMismatch, SingleClass
from altcite.neural import (
    SELU_ALPHA,
    SELU_LAMBDA,
    MLPParams,
    forward,
    init_params,
    log_softmax,
    loss_and_gradients,
    rmsprop_step,
    selu,
    selu_grad,
    softmax,
    train_mlp,
    write_training_curve,
)


def test_selu_values():
    assert selu(0.0) == 0.0
    assert selu(1.0) == pytest.approx(1.0507009873)
    assert selu(-1.0) == pytest.approx(SELU_LAMBDA * SELU_ALPHA * (math.exp(-1) - 1))
    assert selu(-1.0) == pytest.approx(-1.1113307, abs=1e-6)
    assert selu(-50.0) == pytest.approx(-SELU_LAMBDA * SELU_ALPHA, rel=1e-12)


@given(st.floats(-20, 20).filter(lambda v: abs(v) > 1e-3))
def test_selu_grad_matches_finite_difference(x):
    h = 1e-6
    fd = (selu(x + h) - selu(x - h)) / (2 * h)
    assert selu_grad(x) == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_softmax_examples():
    np.testing.assert_allclose(softmax(np.array([[0.0, 0.0]])), [[0.5, 0.5]])
    np.testing.assert_allclose(softmax(np.array([[1000.0, 0.0]])), [[1.0, 0.0]])
    np.testing.assert_allclose(np.exp(log_softmax(np.array([[2.0, -1.0, 0.5]]))), softmax(np.array([[2.0, -1.0, 0.5]])))


@given(st.lists(st.floats(-30, 30), min_size=2, max_size=6), st.floats(-100, 100))
def test_softmax_shift_invariant(z, c):
    a = softmax(np.array([z]))
    b = softmax(np.array([z]) + c)
    np.testing.assert_allclose(a, b, atol=1e-12)
    assert a.sum() == pytest.approx(1.0)


def test_hand_computed_chain():
    # 1 input -> 1 hidden -> 2 outputs
    params = [np.array([[2.0]]), np.array([-1.0]), np.array([[1.0, -1.0]]), np.array([0.0, 0.0])]
    X = np.array([[1.0]])
    Y = np.array([[1.0, 0.0]])
    loss, grads = loss_and_gradients(params, X, Y)
    h = SELU_LAMBDA  # selu(2 - 1)
    p1 = 1 / (1 + math.exp(-2 * h))
    assert loss == pytest.approx(-math.log(p1))
    # dL/dlogits = p - y
    d = np.array([p1 - 1, 1 - p1])
    np.testing.assert_allclose(grads[3], d)
    np.testing.assert_allclose(grads[2], [[h * d[0], h * d[1]]])
    dh = d @ np.array([1.0, -1.0])
    assert grads[1][0] == pytest.approx(dh * SELU_LAMBDA)
    assert grads[0][0, 0] == pytest.approx(dh * SELU_LAMBDA)


def test_zero_output_layer_loss_is_ln2():
    rng = np.random.default_rng(0)
    params = init_params(3, MLPParams(hidden_sizes=(4,)), 2, rng)
    params[2] = np.zeros_like(params[2])
    Y = np.eye(2)[rng.integers(0, 2, size=10)]
    loss, _ = loss_and_gradients(params, rng.normal(size=(10, 3)), Y)
    assert loss == pytest.approx(math.log(2))


def _fd_check(params, X, Y, head, h=1e-5):
    _, grads = loss_and_gradients(params, X, Y, head)
    worst = 0.0
    for k, p in enumerate(params):
        for idx in np.ndindex(p.shape):
            plus = [q.copy() for q in params]
            minus = [q.copy() for q in params]
            plus[k][idx] += h
            minus[k][idx] -= h
            fd = (loss_and_gradients(plus, X, Y, head)[0] - loss_and_gradients(minus, X, Y, head)[0]) / (2 * h)
            g = grads[k][idx]
            worst = max(worst, abs(g - fd) / max(abs(g), abs(fd), 1e-8))
    return worst


@pytest.mark.parametrize("head", ["softmax", "identity"])
def test_gradients_match_central_differences(head):
    for seed in range(6):
        rng = np.random.default_rng(seed)
        config = MLPParams(hidden_sizes=(5, 3), head=head)
        n_out = 2 if head == "softmax" else 1
        params = init_params(4, config, n_out, rng)
        params = [p + 0.1 * rng.normal(size=p.shape) for p in params]
        X = rng.normal(size=(7, 4))
        Y = np.eye(2)[rng.integers(0, 2, size=7)] if head == "softmax" else rng.normal(size=(7, 1))
        assert _fd_check(params, X, Y, head) < 1e-4


def test_init_scale_and_zero_biases():
    params = init_params(400, MLPParams(hidden_sizes=(300,)), 2, np.random.default_rng(1))
    assert params[0].std() == pytest.approx(1 / 20, rel=0.02)
    assert not params[1].any() and not params[3].any()


def test_rmsprop_first_step_closed_form():
    p = [np.array([1.0, -2.0])]
    g = [np.array([0.5, -4.0])]
    s = [np.zeros(2)]
    new_p, new_s = rmsprop_step(s, g, p, lr=0.01, rho=0.9, eps=1e-8)
    np.testing.assert_allclose(new_s[0], 0.1 * g[0] ** 2)
    # first step moves each weight by about lr / sqrt(1 - rho)
    np.testing.assert_allclose(new_p[0], p[0] - 0.01 * np.sign(g[0]) / math.sqrt(0.1), rtol=1e-6)
    assert p[0].tolist() == [1.0, -2.0] and not s[0].any()


def test_rmsprop_constant_gradient_limit():
    p, s = [np.array([0.0])], [np.zeros(1)]
    for _ in range(400):
        p, s = rmsprop_step(s, [np.array([3.0])], p, lr=0.001, rho=0.9, eps=1e-8)
    assert s[0][0] == pytest.approx(9.0, rel=1e-6)


def _blobs(seed=0, n=200):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-2, 1, size=(n // 2, 2)), rng.normal(2, 1, size=(n // 2, 2))])
    y = np.r_[np.zeros(n // 2, int), np.ones(n // 2, int)]
    return X, y


def test_training_separates_blobs():
    X, y = _blobs()
    m = train_mlp(X, y, MLPParams(hidden_sizes=(16,), epochs=20, learning_rate=0.01))
    assert np.mean(m.predict(X) == y) >= 0.95
    assert m.loss_history[-1] < m.loss_history[0]
    np.testing.assert_allclose(forward(m, X).sum(axis=1), 1.0)


def test_training_is_deterministic():
    X, y = _blobs(1, 60)
    config = MLPParams(hidden_sizes=(8,), epochs=3, batch_size=7, seed=5)
    a, b = train_mlp(X, y, config), train_mlp(X, y, config)
    for p, q in zip(a.params, b.params):
        np.testing.assert_array_equal(p, q)
    assert a.loss_history == b.loss_history


def test_zero_epochs_returns_initialization():
    X, y = _blobs(2, 20)
    config = MLPParams(hidden_sizes=(4,), epochs=0, seed=3)
    m = train_mlp(X, y, config)
    expected = init_params(2, config, 2, np.random.default_rng(3))
    for p, q in zip(m.params, expected):
        np.testing.assert_array_equal(p, q)
    assert len(m.loss_history) == 1


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000))
def test_loss_history_length(seed):
    X, y = _blobs(seed, 20)
    m = train_mlp(X, y, MLPParams(hidden_sizes=(3,), epochs=2, seed=seed))
    assert len(m.loss_history) == 3
    assert all(v >= 0 for v in m.loss_history)


def test_identity_head_regression():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(100, 2))
    y = X[:, 0] - 0.5 * X[:, 1]
    m = train_mlp(X, y, MLPParams(hidden_sizes=(16,), epochs=40, learning_rate=0.01, head="identity"))
    assert np.mean((m.predict(X) - y) ** 2) < 0.05
    with pytest.raises(TypeError):
        m.predict_proba(X)


def test_errors():
    with pytest.raises(SingleClass):
        train_mlp(np.ones((3, 1)), [1, 1, 1], MLPParams(hidden_sizes=(2,), epochs=1))
    m = train_mlp(*_blobs(0, 10), MLPParams(hidden_sizes=(2,), epochs=0))
    with pytest.raises(FeatureCountMismatch):
        m.predict(np.ones((1, 3)))


def test_training_curve_csv(tmp_path):
    m = train_mlp(*_blobs(0, 20), MLPParams(hidden_sizes=(3,), epochs=2))
    path = tmp_path / "curve.csv"
    write_training_curve(m, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "epoch,loss"
    assert [int(line.split(",")[0]) for line in lines[1:]] == [0, 1, 2]
    assert float(lines[1].split(",")[1]) == m.loss_history[0]
