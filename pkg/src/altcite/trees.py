"""CART trees, random forests, AdaBoost and gradient boosting.

Split candidates are midpoints between consecutive distinct sorted values.
Among splits whose score is within ``TIE_TOL`` of the best, the lowest
feature index wins, then the lowest threshold. Samples with
``x <= threshold`` go left.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import EmptyData, FeatureCountMismatch, SingleClass

CLASSIFICATION_CRITERIA = ("gini", "entropy")
REGRESSION_CRITERIA = ("mse", "mae", "friedman_mse")
TIE_TOL = 1e-12
MIN_GAIN = 1e-12
_MASK64 = (1 << 64) - 1


def mix64(seed: int, index: int) -> int:
    """Derive a member seed from a parent seed (splitmix64 finalizer).

    ``z = seed + (index + 1) * 0x9E3779B97F4A7C15 (mod 2**64)``, then the
    standard splitmix64 xor-shift-multiply rounds.
    """
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class TreeParams:
    criterion: str = "gini"
    max_depth: Optional[int] = None
    min_samples_split: Union[int, float] = 2
    min_samples_leaf: Union[int, float] = 1
    max_features: Union[int, float, str, None] = None
    random_state: int = 0

    def __post_init__(self):
        if self.criterion not in CLASSIFICATION_CRITERIA + REGRESSION_CRITERIA:
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        for name in ("min_samples_split", "min_samples_leaf"):
            v = getattr(self, name)
            if isinstance(v, bool):
                raise ValueError(f"{name} must be a count or a fraction")
            if isinstance(v, float):
                if not 0.0 < v <= 1.0:
                    raise ValueError(f"fractional {name} must lie in (0, 1]")
            elif v < 1:
                raise ValueError(f"{name} must be >= 1")
        mf = self.max_features
        if isinstance(mf, str) and mf not in ("sqrt", "log2"):
            raise ValueError(f"unknown max_features {mf!r}")
        if isinstance(mf, float) and not 0.0 < mf <= 1.0:
            raise ValueError("fractional max_features must lie in (0, 1]")
        if isinstance(mf, int) and not isinstance(mf, bool) and mf < 1:
            raise ValueError("max_features must be >= 1")

    @property
    def task(self) -> str:
        return "classification" if self.criterion in CLASSIFICATION_CRITERIA else "regression"

    def resolve(self, n: int, p: int) -> tuple[int, int, int]:
        """(min_samples_split, min_samples_leaf, max_features) as counts."""
        split = self.min_samples_split
        split = math.ceil(split * n) if isinstance(split, float) else int(split)
        split = max(split, 2)
        leaf = self.min_samples_leaf
        leaf = max(1, math.ceil(leaf * n) if isinstance(leaf, float) else int(leaf))
        mf = self.max_features
        if mf is None:
            feats = p
        elif mf == "sqrt":
            feats = max(1, int(math.sqrt(p)))
        elif mf == "log2":
            feats = max(1, int(math.log2(p))) if p > 1 else 1
        elif isinstance(mf, float):
            feats = max(1, int(mf * p))
        else:
            feats = min(int(mf), p)
        return split, leaf, feats


@dataclass(frozen=True)
class EnsembleParams:
    num_estimators: int = 100
    learning_rate: float = 1.0
    tree: TreeParams = field(default_factory=TreeParams)
    bootstrap: bool = True

    def __post_init__(self):
        if self.num_estimators < 1:
            raise ValueError("num_estimators must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")


@dataclass(frozen=True)
class ImportanceVector:
    values: np.ndarray
    feature_names: tuple = ()
    all_zero: bool = False

    def as_dict(self) -> dict:
        return dict(zip(self.feature_names, (float(v) for v in self.values)))


# --- impurity -------------------------------------------------------------


def _gini(p: np.ndarray) -> np.ndarray:
    return 1.0 - np.sum(p * p, axis=-1)


def _entropy(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -np.sum(p * logs, axis=-1)


def impurity(values, criterion: str) -> float:
    """Node impurity.

    For ``gini``/``entropy`` ``values`` is a class-probability (or count)
    vector; for the regression criteria it is the vector of targets.
    ``friedman_mse`` scores splits differently but shares the MSE node
    impurity.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("impurity of an empty input")
    if criterion in CLASSIFICATION_CRITERIA:
        p = v / v.sum()
        return float(_gini(p) if criterion == "gini" else _entropy(p))
    if criterion in ("mse", "friedman_mse"):
        return float(np.mean((v - v.mean()) ** 2))
    if criterion == "mae":
        return float(np.mean(np.abs(v - np.median(v))))
    raise ValueError(f"unknown criterion {criterion!r}")


# --- tree structure -------------------------------------------------------


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    impurity: np.ndarray
    n_samples: np.ndarray
    weighted_n: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.node_count, dtype=int)
        for node in range(self.node_count):
            if self.feature[node] >= 0:
                depth[self.left[node]] = depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            active = np.flatnonzero(self.feature[node] >= 0)
            if active.size == 0:
                return node
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])

    def to_dict(self) -> dict:
        return {k: np.asarray(v).tolist() for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=float),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=np.asarray(d["value"], dtype=float),
            impurity=np.asarray(d["impurity"], dtype=float),
            n_samples=np.asarray(d["n_samples"], dtype=np.int64),
            weighted_n=np.asarray(d["weighted_n"], dtype=float),
        )


class _SplitSearch:
    """Best-split search over one node's samples."""

    def __init__(self, X, y, w, criterion, n_classes, min_leaf):
        self.X = X
        self.y = y
        self.w = w
        self.criterion = criterion
        self.n_classes = n_classes
        self.min_leaf = min_leaf
        if criterion in CLASSIFICATION_CRITERIA:
            self.onehot = np.eye(n_classes)[y.astype(np.int64)] * w[:, None]

    def node_stats(self, idx):
        w = self.w[idx]
        wn = float(w.sum())
        if self.criterion in CLASSIFICATION_CRITERIA:
            counts = self.onehot[idx].sum(axis=0)
            p = counts / wn
            imp = float(_gini(p) if self.criterion == "gini" else _entropy(p))
            return p, imp, wn
        y = self.y[idx]
        if self.criterion == "mae":
            med = float(np.median(y))
            return np.array([med]), float(np.mean(np.abs(y - med))), wn
        mean = float(np.dot(w, y) / wn)
        return np.array([mean]), float(np.dot(w, (y - mean) ** 2) / wn), wn

    def _feature_scores(self, idx, f, parent_imp, wn):
        xs = self.X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        m = len(xs)
        nl = np.arange(1, m)
        valid = (xs[:-1] < xs[1:]) & (nl >= self.min_leaf) & (m - nl >= self.min_leaf)
        if not valid.any():
            return None
        ws = self.w[idx][order]
        wl = np.cumsum(ws)[:-1]
        wr = wn - wl
        wl_safe = np.where(wl > 0, wl, 1.0)
        wr_safe = np.where(wr > 0, wr, 1.0)
        if self.criterion in CLASSIFICATION_CRITERIA:
            cum = np.cumsum(self.onehot[idx][order], axis=0)[:-1]
            total = cum[-1] + self.onehot[idx][order][-1]
            pl = cum / wl_safe[:, None]
            pr = (total - cum) / wr_safe[:, None]
            fn = _gini if self.criterion == "gini" else _entropy
            child = (wl * fn(pl) + wr * fn(pr)) / wn
            gain = parent_imp - child
            score = gain
        elif self.criterion == "mae":
            ys = self.y[idx][order]
            left = _running_abs_dev(ys)[:-1]
            right = _running_abs_dev(ys[::-1])[::-1][1:]
            child = (left + right) / m
            gain = parent_imp - child
            score = gain
        else:
            ys = self.y[idx][order]
            ys = ys - np.dot(ws, ys) / wn
            s1 = np.cumsum(ws * ys)[:-1]
            s2 = np.cumsum(ws * ys * ys)[:-1]
            t1 = float(np.dot(ws, ys))
            t2 = float(np.dot(ws, ys * ys))
            mean_l = s1 / wl_safe
            mean_r = (t1 - s1) / wr_safe
            var_l = np.maximum(s2 / wl_safe - mean_l**2, 0.0)
            var_r = np.maximum((t2 - s2) / wr_safe - mean_r**2, 0.0)
            child = (wl * var_l + wr * var_r) / wn
            gain = parent_imp - child
            if self.criterion == "friedman_mse":
                score = wl * wr / wn * (mean_l - mean_r) ** 2
            else:
                score = gain
        score = np.where(valid, score, -np.inf)
        thresholds = (xs[:-1] + xs[1:]) / 2.0
        # Guard against midpoints that round up to the right value.
        thresholds = np.where(thresholds >= xs[1:], xs[:-1], thresholds)
        return score, gain, thresholds

    def best(self, idx, features, parent_imp, wn):
        per_feature = []
        for f in features:
            res = self._feature_scores(idx, f, parent_imp, wn)
            if res is None:
                continue
            score, gain, thr = res
            per_feature.append((f, score, gain, thr, float(score.max())))
        if not per_feature:
            return None
        top = max(pf[4] for pf in per_feature)
        if not np.isfinite(top):
            return None
        for f, score, gain, thr, fmax in sorted(per_feature, key=lambda t: t[0]):
            if fmax >= top - TIE_TOL:
                i = int(np.flatnonzero(score >= top - TIE_TOL)[0])
                return f, float(thr[i]), float(gain[i])
        return None


def _running_abs_dev(ys: np.ndarray) -> np.ndarray:
    """out[i] = sum |y_k - median(y_0..y_i)| over k <= i."""
    lo: list = []  # max-heap (negated) of the lower half
    hi: list = []
    sum_lo = sum_hi = 0.0
    out = np.empty(len(ys))
    for i, v in enumerate(ys):
        v = float(v)
        if not lo or v <= -lo[0]:
            heapq.heappush(lo, -v)
            sum_lo += v
        else:
            heapq.heappush(hi, v)
            sum_hi += v
        if len(lo) > len(hi) + 1:
            x = -heapq.heappop(lo)
            sum_lo -= x
            heapq.heappush(hi, x)
            sum_hi += x
        elif len(hi) > len(lo):
            x = heapq.heappop(hi)
            sum_hi -= x
            heapq.heappush(lo, -x)
            sum_lo += x
        med = -lo[0]
        out[i] = (med * len(lo) - sum_lo) + (sum_hi - med * len(hi))
    return out


def _build_tree(X, y, w, params: TreeParams, n_classes: int) -> Tree:
    n, p = X.shape
    min_split, min_leaf, n_feats = params.resolve(n, p)
    if params.criterion == "mae" and not np.allclose(w, w[0]):
        raise ValueError("the mae criterion does not support sample weights")
    rng = np.random.default_rng(params.random_state) if n_feats < p else None
    search = _SplitSearch(X, y, w, params.criterion, n_classes, min_leaf)

    feature, threshold, left, right = [], [], [], []
    value, imp, n_samples, weighted = [], [], [], []

    def new_node(idx):
        val, node_imp, wn = search.node_stats(idx)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(val)
        imp.append(node_imp)
        n_samples.append(len(idx))
        weighted.append(wn)
        return len(feature) - 1

    root = new_node(np.arange(n))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        m = len(idx)
        if (
            (params.max_depth is not None and depth >= params.max_depth)
            or m < min_split
            or m < 2 * min_leaf
            or imp[node] <= 0.0
        ):
            continue
        if rng is not None:
            feats = np.sort(rng.choice(p, size=n_feats, replace=False))
        else:
            feats = range(p)
        found = search.best(idx, feats, imp[node], weighted[node])
        if found is None:
            continue
        f, thr, gain = found
        if not gain > MIN_GAIN:
            continue
        mask = X[idx, f] <= thr
        li = new_node(idx[mask])
        ri = new_node(idx[~mask])
        feature[node] = int(f)
        threshold[node] = thr
        left[node] = li
        right[node] = ri
        stack.append((ri, idx[~mask], depth + 1))
        stack.append((li, idx[mask], depth + 1))

    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=float),
        impurity=np.asarray(imp, dtype=float),
        n_samples=np.asarray(n_samples, dtype=np.int64),
        weighted_n=np.asarray(weighted, dtype=float),
    )


def _tree_importances(tree: Tree, p: int) -> np.ndarray:
    out = np.zeros(p)
    for node in np.flatnonzero(tree.feature >= 0):
        l, r = tree.left[node], tree.right[node]
        dec = (
            tree.weighted_n[node] * tree.impurity[node]
            - tree.weighted_n[l] * tree.impurity[l]
            - tree.weighted_n[r] * tree.impurity[r]
        )
        out[tree.feature[node]] += max(dec, 0.0)
    return out / tree.weighted_n[0]


def _normalize(raw: np.ndarray, names: tuple) -> ImportanceVector:
    total = raw.sum()
    if total <= 0:
        return ImportanceVector(np.zeros_like(raw), names, True)
    return ImportanceVector(raw / total, names, False)


# --- input handling -------------------------------------------------------


def _as_matrix(X) -> tuple[np.ndarray, tuple]:
    names = tuple(getattr(X, "feature_names", ()))
    values = getattr(X, "values", X)
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if not names:
        names = tuple(f"x{j}" for j in range(arr.shape[1]))
    return arr, names


def _as_target(y) -> np.ndarray:
    return np.asarray(getattr(y, "values", y))


def _class_labels(y: np.ndarray) -> tuple[np.ndarray, int]:
    yi = np.asarray(y)
    if not np.all(np.equal(np.mod(yi, 1), 0)) or np.any(yi < 0):
        raise ValueError("classification targets must be non-negative integers")
    yi = yi.astype(np.int64)
    return yi, max(2, int(yi.max()) + 1)


class _Model:
    n_features: int
    feature_names: tuple

    def _check(self, X) -> np.ndarray:
        arr, _ = _as_matrix(X)
        if arr.shape[1] != self.n_features:
            raise FeatureCountMismatch(f"model expects {self.n_features} features, got {arr.shape[1]}")
        return arr

    def predict(self, X) -> np.ndarray:
        if self.task == "classification":
            return np.argmax(self.predict_proba(X), axis=1)
        return self._regress(self._check(X))


# --- single trees ---------------------------------------------------------


@dataclass
class TreeModel(_Model):
    tree: Tree
    task: str
    n_features: int
    n_classes: int
    params: TreeParams
    feature_names: tuple = ()

    def predict_proba(self, X) -> np.ndarray:
        if self.task != "classification":
            raise TypeError("predict_proba is only defined for classification trees")
        arr = self._check(X)
        return self.tree.value[self.tree.apply(arr)]

    def _regress(self, arr):
        return self.tree.value[self.tree.apply(arr), 0]

    def feature_importances(self) -> ImportanceVector:
        return _normalize(_tree_importances(self.tree, self.n_features), self.feature_names)


def fit_tree(X, y, params: TreeParams = TreeParams(), sample_weight=None) -> TreeModel:
    arr, names = _as_matrix(X)
    target = _as_target(y)
    n = arr.shape[0]
    if n == 0:
        raise EmptyData("cannot fit a tree on zero samples")
    if len(target) != n:
        raise ValueError("X and y lengths differ")
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    if params.task == "classification":
        target, k = _class_labels(target)
    else:
        target = target.astype(float)
        k = 1
    tree = _build_tree(arr, target, w, params, k)
    return TreeModel(tree, params.task, arr.shape[1], k, params, names)


# --- random forest --------------------------------------------------------


@dataclass
class ForestModel(_Model):
    trees: list
    task: str
    n_features: int
    n_classes: int
    params: EnsembleParams
    feature_names: tuple = ()

    def votes(self, X) -> np.ndarray:
        arr = self._check(X)
        labels = np.stack([np.argmax(t.tree.value[t.tree.apply(arr)], axis=1) for t in self.trees], axis=1)
        return np.stack([(labels == c).sum(axis=1) for c in range(self.n_classes)], axis=1)

    def predict(self, X) -> np.ndarray:
        if self.task == "classification":
            return np.argmax(self.votes(X), axis=1)
        return self._regress(self._check(X))

    def predict_proba(self, X) -> np.ndarray:
        if self.task != "classification":
            raise TypeError("predict_proba is only defined for classification forests")
        arr = self._check(X)
        return np.mean([t.tree.value[t.tree.apply(arr)] for t in self.trees], axis=0)

    def _regress(self, arr):
        return np.mean([t.tree.value[t.tree.apply(arr), 0] for t in self.trees], axis=0)

    def feature_importances(self) -> ImportanceVector:
        vecs = [t.feature_importances().values for t in self.trees]
        return _normalize(np.mean(vecs, axis=0), self.feature_names)


def fit_random_forest(X, y, params: EnsembleParams = EnsembleParams()) -> ForestModel:
    """Bagged trees. Member ``t`` draws its bootstrap with seed
    ``mix64(random_state, 2t + 1)`` and splits with ``mix64(random_state, 2t)``.
    """
    arr, names = _as_matrix(X)
    target = _as_target(y)
    n = arr.shape[0]
    if n == 0:
        raise EmptyData("cannot fit a forest on zero samples")
    seed = params.tree.random_state
    trees = []
    for t in range(params.num_estimators):
        if params.bootstrap:
            idx = np.random.default_rng(mix64(seed, 2 * t + 1)).integers(0, n, size=n)
        else:
            idx = np.arange(n)
        tp = replace(params.tree, random_state=mix64(seed, 2 * t))
        trees.append(fit_tree(arr[idx], target[idx], tp))
    k = max(t.n_classes for t in trees)
    for t in trees:
        if t.n_classes < k:
            t.tree.value = np.pad(t.tree.value, ((0, 0), (0, k - t.n_classes)))
            t.n_classes = k
    return ForestModel(trees, params.tree.task, arr.shape[1], k, params, names)


# --- AdaBoost -------------------------------------------------------------

_PERFECT_EPS = 1e-10


@dataclass
class AdaBoostModel(_Model):
    stumps: list
    alphas: list
    errors: list
    n_features: int
    params: EnsembleParams
    feature_names: tuple = ()
    weight_trace: list = field(default_factory=list)
    task: str = "classification"
    n_classes: int = 2

    def decision_function(self, X) -> np.ndarray:
        arr = self._check(X)
        score = np.zeros(arr.shape[0])
        for stump, alpha in zip(self.stumps, self.alphas):
            h = np.argmax(stump.tree.value[stump.tree.apply(arr)], axis=1)
            score += alpha * (2.0 * h - 1.0)
        return score

    def predict_proba(self, X) -> np.ndarray:
        # Monotone map of the vote margin onto [0, 1]; not calibrated.
        p1 = 1.0 / (1.0 + np.exp(-2.0 * self.decision_function(X)))
        return np.column_stack([1.0 - p1, p1])

    def staged_training_error(self, X, y) -> list[float]:
        arr = self._check(X)
        y = _as_target(y)
        score = np.zeros(arr.shape[0])
        out = []
        for stump, alpha in zip(self.stumps, self.alphas):
            h = np.argmax(stump.tree.value[stump.tree.apply(arr)], axis=1)
            score += alpha * (2.0 * h - 1.0)
            out.append(float(np.mean((score > 0).astype(int) != y)))
        return out

    def feature_importances(self) -> ImportanceVector:
        vecs = [s.feature_importances().values for s in self.stumps]
        return _normalize(np.mean(vecs, axis=0), self.feature_names)


def fit_adaboost(X, y, params: EnsembleParams = EnsembleParams(num_estimators=50), trace: bool = False) -> AdaBoostModel:
    """Discrete two-class AdaBoost over depth-1 stumps.

    Round t: weighted error ``eps``, stage weight
    ``alpha = learning_rate * ln((1 - eps) / eps)``, misclassified weights
    multiplied by ``exp(alpha)``, then renormalized. Stops once ``eps >= 0.5``
    (recorded with alpha 0) or ``eps == 0`` (perfect stump recorded).
    """
    arr, names = _as_matrix(X)
    target, _ = _class_labels(_as_target(y))
    n = arr.shape[0]
    if n == 0:
        raise EmptyData("cannot fit AdaBoost on zero samples")
    if len(np.unique(target)) < 2:
        raise SingleClass("AdaBoost needs both classes in the training labels")
    if target.max() > 1:
        raise ValueError("AdaBoost here is binary; labels must be 0/1")
    stump_params = replace(params.tree, max_depth=1)
    if stump_params.task != "classification":
        stump_params = replace(stump_params, criterion="gini")
    w = np.full(n, 1.0 / n)
    model = AdaBoostModel([], [], [], arr.shape[1], params, names)
    for t in range(params.num_estimators):
        if trace:
            model.weight_trace.append(w.copy())
        stump = fit_tree(arr, target, replace(stump_params, random_state=mix64(stump_params.random_state, t)), sample_weight=w)
        h = np.argmax(stump.tree.value[stump.tree.apply(arr)], axis=1)
        miss = h != target
        eps = float(np.sum(w[miss]) / np.sum(w))
        model.stumps.append(stump)
        model.errors.append(eps)
        if eps >= 0.5:
            model.alphas.append(0.0)
            break
        if eps <= 0.0:
            model.alphas.append(params.learning_rate * math.log((1 - _PERFECT_EPS) / _PERFECT_EPS))
            break
        alpha = params.learning_rate * math.log((1 - eps) / eps)
        model.alphas.append(alpha)
        w = w * np.exp(alpha * miss)
        w = w / w.sum()
    return model


# --- gradient boosting ----------------------------------------------------


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


@dataclass
class GradientBoostingModel(_Model):
    init: float
    trees: list
    learning_rate: float
    task: str
    n_features: int
    params: EnsembleParams
    feature_names: tuple = ()
    n_classes: int = 2

    def staged_decision(self, X) -> list[np.ndarray]:
        arr = self._check(X)
        f = np.full(arr.shape[0], self.init)
        out = [f.copy()]
        for t in self.trees:
            f = f + self.learning_rate * t.tree.value[t.tree.apply(arr), 0]
            out.append(f.copy())
        return out

    def decision_function(self, X) -> np.ndarray:
        return self.staged_decision(X)[-1]

    def predict_proba(self, X) -> np.ndarray:
        if self.task != "classification":
            raise TypeError("predict_proba is only defined for classification boosting")
        p1 = _sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p1, p1])

    def _regress(self, arr):
        return self.decision_function(arr)

    def feature_importances(self) -> ImportanceVector:
        vecs = [t.feature_importances().values for t in self.trees]
        if not vecs:
            return _normalize(np.zeros(self.n_features), self.feature_names)
        return _normalize(np.mean(vecs, axis=0), self.feature_names)


def fit_gradient_boosting(X, y, params: EnsembleParams = None, task: str = "classification") -> GradientBoostingModel:
    """Gradient boosting with regression-tree stages.

    Classification minimizes binomial deviance from the prior log-odds;
    regression minimizes squared error from the target mean. Each stage fits
    a tree to the negative gradient (``y - p`` or ``y - F``) and adds
    ``learning_rate`` times its leaf means.
    """
    if params is None:
        params = EnsembleParams(num_estimators=100, learning_rate=0.1, tree=TreeParams(criterion="friedman_mse", max_depth=3))
    tree_params = params.tree
    if tree_params.task != "regression":
        raise ValueError("gradient boosting stages need a regression criterion (mse, mae, friedman_mse)")
    arr, names = _as_matrix(X)
    target = _as_target(y).astype(float)
    n = arr.shape[0]
    if n == 0:
        raise EmptyData("cannot fit gradient boosting on zero samples")
    if task == "classification":
        labels, _ = _class_labels(target)
        if len(np.unique(labels)) < 2:
            raise SingleClass("gradient boosting classification needs both classes")
        prior = labels.mean()
        init = math.log(prior / (1.0 - prior))
    elif task == "regression":
        init = float(target.mean())
    else:
        raise ValueError(f"unknown task {task!r}")
    f = np.full(n, init)
    trees = []
    for t in range(params.num_estimators):
        resid = target - (_sigmoid(f) if task == "classification" else f)
        stage = fit_tree(arr, resid, replace(tree_params, random_state=mix64(tree_params.random_state, t)))
        trees.append(stage)
        f = f + params.learning_rate * stage.tree.value[stage.tree.apply(arr), 0]
    return GradientBoostingModel(init, trees, params.learning_rate, task, arr.shape[1], params, names)


# --- uniform entry points -------------------------------------------------


def predict(model, X) -> np.ndarray:
    return model.predict(X)


def feature_importances(model) -> ImportanceVector:
    return model.feature_importances()
