"""Fully connected SELU network with a softmax head, trained by mini-batch RMSprop."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyData, FeatureCountMismatch, SingleClass
from .trees import _as_matrix, _as_target, _class_labels

SELU_ALPHA = 1.6732632423
SELU_LAMBDA = 1.0507009873


def selu(x):
    x = np.asarray(x, dtype=float)
    return SELU_LAMBDA * np.where(x > 0, x, SELU_ALPHA * np.expm1(np.minimum(x, 0.0)))


def selu_grad(x):
    x = np.asarray(x, dtype=float)
    return SELU_LAMBDA * np.where(x > 0, 1.0, SELU_ALPHA * np.exp(np.minimum(x, 0.0)))


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


@dataclass(frozen=True)
class MLPParams:
    hidden_sizes: tuple = (512,)
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.001
    rho: float = 0.9
    epsilon: float = 1e-8
    seed: int = 0
    head: str = "softmax"  # "identity" gives a single-output regressor

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if any(h < 1 for h in self.hidden_sizes) or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("layer sizes and batch size must be positive, epochs non-negative")
        if not (self.learning_rate > 0 and 0 < self.rho < 1 and self.epsilon > 0):
            raise ValueError("learning_rate, rho and epsilon out of range")
        if self.head not in ("softmax", "identity"):
            raise ValueError(f"unknown head {self.head!r}")


@dataclass
class MLPModel:
    params: list  # [W0, b0, W1, b1, ...]
    config: MLPParams
    n_features: int
    loss_history: list = field(default_factory=list)

    @property
    def n_layers(self) -> int:
        return len(self.params) // 2

    def _check(self, X) -> np.ndarray:
        arr, _ = _as_matrix(X)
        if arr.shape[1] != self.n_features:
            raise FeatureCountMismatch(f"model expects {self.n_features} features, got {arr.shape[1]}")
        return arr

    def logits(self, X) -> np.ndarray:
        return _forward(self.params, self._check(X))[0]

    def predict_proba(self, X) -> np.ndarray:
        if self.config.head != "softmax":
            raise TypeError("predict_proba needs the softmax head")
        return softmax(self.logits(X))

    def predict(self, X) -> np.ndarray:
        out = self.logits(X)
        if self.config.head == "identity":
            return out[:, 0]
        return np.argmax(out, axis=1)

    def curve_rows(self) -> list[tuple[int, float]]:
        return list(enumerate(self.loss_history))


def _forward(params: Sequence[np.ndarray], X: np.ndarray):
    """Return (output pre-activations, cache of per-layer inputs and pre-activations)."""
    cache = []
    h = X
    n_layers = len(params) // 2
    for layer in range(n_layers):
        W, b = params[2 * layer], params[2 * layer + 1]
        z = h @ W + b
        cache.append((h, z))
        h = selu(z) if layer < n_layers - 1 else z
    return h, cache


def forward(model: MLPModel, X) -> np.ndarray:
    """Class probabilities (softmax head) or raw outputs (identity head)."""
    out = model.logits(X)
    return softmax(out) if model.config.head == "softmax" else out


def init_params(n_in: int, config: MLPParams, n_out: int, rng: np.random.Generator) -> list:
    sizes = (n_in,) + config.hidden_sizes + (n_out,)
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        params.append(rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def loss_and_gradients(params: Sequence[np.ndarray], X, Y, head: str = "softmax"):
    """Mean loss over the batch and exact gradients for every parameter.

    Softmax head: cross-entropy against one-hot ``Y``. Identity head: mean
    squared error against ``Y`` of shape (n, 1).
    """
    if isinstance(params, MLPModel):
        head = params.config.head
        params = params.params
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = X.shape[0]
    out, cache = _forward(params, X)
    if head == "softmax":
        logp = log_softmax(out)
        loss = float(-np.sum(Y * logp) / n)
        delta = (np.exp(logp) - Y) / n
    else:
        diff = out - Y.reshape(out.shape)
        loss = float(np.mean(diff**2))
        delta = 2.0 * diff / diff.size
    grads = [None] * len(params)
    for layer in range(len(params) // 2 - 1, -1, -1):
        h, z = cache[layer]
        if layer < len(params) // 2 - 1:
            delta = delta * selu_grad(z)
        grads[2 * layer] = h.T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ params[2 * layer].T
    return loss, grads


def rmsprop_step(state, grads, params, lr=0.001, rho=0.9, eps=1e-8):
    """One RMSprop update; returns (new_params, new_state) without mutating inputs."""
    new_state = [rho * s + (1.0 - rho) * g * g for s, g in zip(state, grads)]
    new_params = [p - lr * g / (np.sqrt(s) + eps) for p, g, s in zip(params, grads, new_state)]
    return new_params, new_state


def _targets(y, head: str) -> np.ndarray:
    if head == "softmax":
        labels, _ = _class_labels(_as_target(y))
        if labels.size and labels.max() > 1:
            raise ValueError("labels must be 0/1")
        if len(np.unique(labels)) < 2:
            raise SingleClass("both classes must be present to train the classifier")
        return np.eye(2)[labels]
    return np.asarray(_as_target(y), dtype=float).reshape(-1, 1)


def train_mlp(X, y, config: MLPParams = MLPParams()) -> MLPModel:
    """Mini-batch RMSprop; rows are reshuffled every epoch from the seeded stream.

    ``loss_history[e]`` is the full-training-set loss after ``e`` epochs,
    so entry 0 is the loss at initialization.
    """
    arr, _ = _as_matrix(X)
    n = arr.shape[0]
    if n == 0:
        raise EmptyData("no training samples")
    Y = _targets(y, config.head)
    rng = np.random.default_rng(config.seed)
    n_out = 2 if config.head == "softmax" else 1
    params = init_params(arr.shape[1], config, n_out, rng)
    state = [np.zeros_like(p) for p in params]
    history = [loss_and_gradients(params, arr, Y, config.head)[0]]
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            _, grads = loss_and_gradients(params, arr[idx], Y[idx], config.head)
            params, state = rmsprop_step(state, grads, params, config.learning_rate, config.rho, config.epsilon)
        history.append(loss_and_gradients(params, arr, Y, config.head)[0])
    return MLPModel(params, config, arr.shape[1], history)


def write_training_curve(model: MLPModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("epoch,loss\n")
        for epoch, loss in model.curve_rows():
            fh.write(f"{epoch},{loss!r}\n")
