"""Bernoulli naive Bayes, k-nearest neighbours and a kernel SVM trained by SMO."""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BadK, EmptyData, FeatureCountMismatch, SingleClass
from .trees import _as_matrix, _as_target, _class_labels

log = logging.getLogger(__name__)


def _binary_labels(y) -> np.ndarray:
    labels, _ = _class_labels(_as_target(y))
    if labels.size == 0:
        raise EmptyData("no training samples")
    if labels.max() > 1:
        raise ValueError("labels must be 0/1")
    if len(np.unique(labels)) < 2:
        raise SingleClass("both classes must be present in the training labels")
    return labels


class _Fitted:
    n_features: int

    def _check(self, X) -> np.ndarray:
        arr, _ = _as_matrix(X)
        if arr.shape[1] != self.n_features:
            raise FeatureCountMismatch(f"model expects {self.n_features} features, got {arr.shape[1]}")
        return arr

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


# --- Bernoulli naive Bayes ------------------------------------------------


@dataclass
class NBModel(_Fitted):
    class_log_prior: np.ndarray
    feature_prob: np.ndarray  # P(x_j = 1 | class), shape (2, p)
    alpha: float
    binarize: float
    n_features: int

    def joint_log_likelihood(self, X) -> np.ndarray:
        xb = (self._check(X) > self.binarize).astype(float)
        logp = np.log(self.feature_prob)
        log1m = np.log1p(-self.feature_prob)
        return xb @ (logp - log1m).T + log1m.sum(axis=1) + self.class_log_prior

    def predict_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        jll = jll - jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)


def fit_bernoulli_nb(X, y, alpha: float = 1.0, binarize: float = 0.0) -> NBModel:
    """Features become ``x > binarize``; P(x=1|c) = (count + alpha) / (n_c + 2 alpha)."""
    arr, _ = _as_matrix(X)
    labels = _binary_labels(y)
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    xb = (arr > binarize).astype(float)
    counts = np.array([np.sum(labels == c) for c in (0, 1)], dtype=float)
    ones = np.vstack([xb[labels == c].sum(axis=0) for c in (0, 1)])
    prob = (ones + alpha) / (counts[:, None] + 2.0 * alpha)
    return NBModel(np.log(counts / counts.sum()), prob, float(alpha), float(binarize), arr.shape[1])


# --- k-nearest neighbours -------------------------------------------------


@dataclass
class KNNModel(_Fitted):
    X: np.ndarray  # standardized training rows
    y: np.ndarray
    k: int
    mean: np.ndarray
    scale: np.ndarray
    n_features: int
    n_classes: int = 2

    def _scaled(self, X) -> np.ndarray:
        return (self._check(X) - self.mean) / self.scale

    def neighbors(self, X, chunk: int = 512) -> np.ndarray:
        """Indices of the k nearest training rows; equal distances keep row order."""
        q = self._scaled(X)
        out = np.empty((q.shape[0], self.k), dtype=np.int64)
        sq_train = np.einsum("ij,ij->i", self.X, self.X)
        for start in range(0, q.shape[0], chunk):
            block = q[start : start + chunk]
            d = np.einsum("ij,ij->i", block, block)[:, None] + sq_train[None, :] - 2.0 * block @ self.X.T
            d = np.maximum(d, 0.0)
            out[start : start + chunk] = np.argsort(d, axis=1, kind="stable")[:, : self.k]
        return out

    def predict_proba(self, X) -> np.ndarray:
        votes = self.y[self.neighbors(X)]
        counts = np.stack([(votes == c).sum(axis=1) for c in range(self.n_classes)], axis=1)
        # argmax of counts takes the smaller class index on a tied vote
        return counts / self.k


def fit_knn(X, y, k: int = 5, standardize: bool = True) -> KNNModel:
    arr, _ = _as_matrix(X)
    labels, n_classes = _class_labels(_as_target(y))
    n = arr.shape[0]
    if n == 0:
        raise EmptyData("no training samples")
    if not 1 <= k <= n:
        raise BadK(f"k={k} must lie in [1, {n}]")
    if standardize:
        mean = arr.mean(axis=0)
        scale = arr.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
    else:
        mean = np.zeros(arr.shape[1])
        scale = np.ones(arr.shape[1])
    return KNNModel((arr - mean) / scale, labels, int(k), mean, scale, arr.shape[1], n_classes)


# --- SVM ------------------------------------------------------------------

KERNELS = ("sigmoid", "linear", "rbf")
_TAU = 1e-12


@dataclass(frozen=True)
class SVMParams:
    C: float = 1.0
    kernel: str = "sigmoid"
    gamma: float = 0.045
    coef0: float = 0.0
    degree: int = 3  # recorded only; no supported kernel uses it
    tol: float = 1e-3
    max_iter: Optional[int] = None
    cache_mb: float = 200.0

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if not self.C > 0 or not self.tol > 0:
            raise ValueError("C and tol must be > 0")


def kernel_matrix(A: np.ndarray, B: np.ndarray, params: SVMParams) -> np.ndarray:
    if params.kernel == "rbf":
        d = np.einsum("ij,ij->i", A, A)[:, None] + np.einsum("ij,ij->i", B, B)[None, :] - 2.0 * A @ B.T
        return np.exp(-params.gamma * np.maximum(d, 0.0))
    dot = A @ B.T
    if params.kernel == "linear":
        return dot
    return np.tanh(params.gamma * dot + params.coef0)


@dataclass
class SVMModel(_Fitted):
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for the support vectors
    support: np.ndarray  # training-row indices of the support vectors
    alpha: np.ndarray  # full dual vector over training rows
    bias: float
    params: SVMParams
    n_features: int
    converged: bool
    iterations: int
    objective_trace: list = field(default_factory=list)

    def decision_function(self, X) -> np.ndarray:
        arr = self._check(X)
        if len(self.dual_coef) == 0:
            return np.full(arr.shape[0], self.bias)
        return kernel_matrix(arr, self.support_vectors, self.params) @ self.dual_coef + self.bias

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(np.int64)

    def predict_proba(self, X) -> np.ndarray:
        # Uncalibrated squashing of the margin, kept for a uniform interface.
        p1 = 1.0 / (1.0 + np.exp(-self.decision_function(X)))
        return np.column_stack([1.0 - p1, p1])


class _RowCache:
    def __init__(self, X, params: SVMParams):
        self.X = X
        self.params = params
        self.rows: OrderedDict = OrderedDict()
        self.capacity = max(2, int(params.cache_mb * 2**20 // max(1, 8 * X.shape[0])))

    def __call__(self, i: int) -> np.ndarray:
        row = self.rows.get(i)
        if row is not None:
            self.rows.move_to_end(i)
            return row
        row = kernel_matrix(self.X[i : i + 1], self.X, self.params)[0]
        self.rows[i] = row
        if len(self.rows) > self.capacity:
            self.rows.popitem(last=False)
        return row


def fit_svm_smo(X, y, params: SVMParams = SVMParams(), trace: bool = False) -> SVMModel:
    """C-SVC dual solved by SMO with maximal-violating-pair selection.

    Gradient ``G = Q alpha - 1`` with ``Q_ij = y_i y_j K_ij``. Stops when
    ``max_{I_up} -y G - min_{I_low} -y G < tol`` or after ``max_iter``
    iterations (default ``100 n``), in which case ``converged`` is False.
    """
    arr, _ = _as_matrix(X)
    labels = _binary_labels(y)
    n = arr.shape[0]
    yy = np.where(labels == 1, 1.0, -1.0)
    C = params.C
    max_iter = params.max_iter if params.max_iter is not None else 100 * n
    row = _RowCache(arr, params)
    if params.kernel == "rbf":
        diag = np.ones(n)
    else:
        sq = np.einsum("ij,ij->i", arr, arr)
        diag = sq if params.kernel == "linear" else np.tanh(params.gamma * sq + params.coef0)

    alpha = np.zeros(n)
    G = -np.ones(n)
    objective = []
    converged = False
    it = 0
    while it < max_iter:
        viol = -yy * G
        up = ((yy > 0) & (alpha < C)) | ((yy < 0) & (alpha > 0))
        low = ((yy > 0) & (alpha > 0)) | ((yy < 0) & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(viol[up])])
        j = int(np.flatnonzero(low)[np.argmin(viol[low])])
        if viol[i] - viol[j] < params.tol:
            converged = True
            break
        Ki = row(i)
        Kj = row(j)
        Qi = yy[i] * yy * Ki
        Qj = yy[j] * yy * Kj
        ai, aj = alpha[i], alpha[j]
        if yy[i] != yy[j]:
            quad = diag[i] + diag[j] + 2.0 * Qi[j]
            quad = quad if quad > 0 else _TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * Qi[j]
            quad = quad if quad > 0 else _TAU
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        alpha[i], alpha[j] = ni, nj
        G += Qi * (ni - ai) + Qj * (nj - aj)
        it += 1
        if trace:
            objective.append(float(0.5 * alpha.sum() - 0.5 * alpha @ G))
    if not converged:
        log.warning("SMO stopped after %d iterations without meeting tol=%g", it, params.tol)

    yG = yy * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        at_upper = alpha >= C
        ub_mask = (at_upper & (yy < 0)) | (~at_upper & (yy > 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[~ub_mask].max() if (~ub_mask).any() else -np.inf
        rho = float((ub + lb) / 2.0) if np.isfinite(ub) and np.isfinite(lb) else float(ub if np.isfinite(ub) else lb)
    sv = np.flatnonzero(alpha > 0)
    return SVMModel(
        support_vectors=arr[sv],
        dual_coef=alpha[sv] * yy[sv],
        support=sv,
        alpha=alpha,
        bias=-rho,
        params=params,
        n_features=arr.shape[1],
        converged=converged,
        iterations=it,
        objective_trace=objective,
    )


def kkt_violations(model: SVMModel, X, y) -> np.ndarray:
    """Per-row amount by which the KKT conditions are violated (0 if satisfied)."""
    labels = np.asarray(_as_target(y))
    yy = np.where(labels == 1, 1.0, -1.0)
    margin = yy * model.decision_function(X)
    a = model.alpha
    C = model.params.C
    out = np.zeros(len(a))
    at_zero = a <= 0
    at_c = a >= C
    free = ~at_zero & ~at_c
    out[at_zero] = np.maximum(0.0, 1.0 - margin[at_zero])
    out[at_c] = np.maximum(0.0, margin[at_c] - 1.0)
    out[free] = np.abs(margin[free] - 1.0)
    return out
