"""Learner registry, k-fold cross-validation, and grid / random hyperparameter search."""

from __future__ import annotations

import copy
import csv
import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any, Callable, Optional

import numpy as np

from . import classic, linear, neural, trees
from .errors import ConfigError, EmptyGrid, FoldError
from .metrics import classification_report, confusion, regression_report
from .preprocess import kfold

CLASSIFICATION = "classification"
REGRESSION = "regression"


# --- metrics --------------------------------------------------------------


def _cls_metric(attr):
    def f(y_true, y_pred):
        return getattr(classification_report(confusion(y_true, y_pred)), attr)

    return f


def _reg_metric(attr, sign=1.0):
    def f(y_true, y_pred):
        return sign * getattr(regression_report(y_true, y_pred), attr)

    return f


METRICS: dict[str, Callable] = {
    "accuracy": _cls_metric("accuracy"),
    "precision": _cls_metric("precision"),
    "recall": _cls_metric("recall"),
    "f1": _cls_metric("f1"),
    "r2": _reg_metric("r2"),
    "neg_mse": _reg_metric("mse", -1.0),
    "neg_mae": _reg_metric("mae", -1.0),
}


# --- learner registry -----------------------------------------------------


@dataclass(frozen=True)
class Family:
    name: str
    tasks: tuple
    scaled: bool
    defaults: dict  # task -> default params
    has_importances: bool = False


def _tree_params(p: dict, seed: int) -> trees.TreeParams:
    return trees.TreeParams(
        criterion=p["criterion"],
        max_depth=p.get("max_depth"),
        min_samples_split=p.get("min_samples_split", 2),
        min_samples_leaf=p.get("min_samples_leaf", 1),
        max_features=p.get("max_features"),
        random_state=seed,
    )


_TREE_DEFAULTS = {"max_depth": None, "min_samples_split": 2, "min_samples_leaf": 1}
_MLP_DEFAULTS = {"hidden_sizes": [512], "epochs": 100, "batch_size": 32, "learning_rate": 0.001}

FAMILIES: dict[str, Family] = {
    f.name: f
    for f in (
        Family(
            "Random Forest",
            (CLASSIFICATION, REGRESSION),
            False,
            {
                CLASSIFICATION: {"num_estimators": 100, "criterion": "gini", "max_features": "sqrt", "bootstrap": True, **_TREE_DEFAULTS},
                REGRESSION: {"num_estimators": 100, "criterion": "mse", "max_features": None, "bootstrap": True, **_TREE_DEFAULTS},
            },
            True,
        ),
        Family(
            "Decision Tree",
            (CLASSIFICATION, REGRESSION),
            False,
            {
                CLASSIFICATION: {"criterion": "gini", "max_features": None, **_TREE_DEFAULTS},
                REGRESSION: {"criterion": "mse", "max_features": None, **_TREE_DEFAULTS},
            },
            True,
        ),
        Family(
            "Gradient Boosting",
            (CLASSIFICATION, REGRESSION),
            False,
            {
                t: {"num_estimators": 100, "learning_rate": 0.1, "criterion": "friedman_mse", "max_features": None, **_TREE_DEFAULTS, "max_depth": 3}
                for t in (CLASSIFICATION, REGRESSION)
            },
            True,
        ),
        Family("AdaBoost", (CLASSIFICATION,), False, {CLASSIFICATION: {"num_estimators": 50, "learning_rate": 1.0}}, True),
        Family("Bernoulli Naive Bayes", (CLASSIFICATION,), False, {CLASSIFICATION: {"alpha": 1.0, "binarize": 0.0}}),
        Family("KNN", (CLASSIFICATION,), False, {CLASSIFICATION: {"k": 5}}),
        Family("Neural Network", (CLASSIFICATION,), True, {CLASSIFICATION: dict(_MLP_DEFAULTS)}),
        Family(
            "SVM",
            (CLASSIFICATION,),
            True,
            {CLASSIFICATION: {"C": 1.0, "kernel": "sigmoid", "gamma": 0.045, "coef0": 0.0, "degree": 3, "tol": 0.001}},
        ),
        Family("Multiple Linear Model", (REGRESSION,), False, {REGRESSION: {}}),
        Family("Neural Network (non-paper variant)", (REGRESSION,), True, {REGRESSION: dict(_MLP_DEFAULTS)}),
        Family("Majority Baseline", (CLASSIFICATION,), False, {CLASSIFICATION: {}}),
    )
}


@dataclass
class MajorityModel:
    label: int

    def predict(self, X) -> np.ndarray:
        return np.full(np.asarray(X).shape[0], self.label, dtype=np.int64)


def resolve_params(family: str, task: str, params: Optional[dict] = None) -> dict:
    if family not in FAMILIES:
        raise ConfigError(f"unknown model family {family!r}")
    fam = FAMILIES[family]
    if task not in fam.tasks:
        raise ConfigError(f"{family} does not support {task}")
    merged = copy.deepcopy(fam.defaults[task])
    for key, value in (params or {}).items():
        if key not in merged:
            raise ConfigError(f"{family} has no parameter {key!r}")
        merged[key] = value
    return merged


def _fit_model(family: str, task: str, p: dict, X: np.ndarray, y: np.ndarray, seed: int):
    if family == "Random Forest":
        ens = trees.EnsembleParams(p["num_estimators"], 1.0, _tree_params(p, seed), p["bootstrap"])
        return trees.fit_random_forest(X, y, ens)
    if family == "Decision Tree":
        return trees.fit_tree(X, y, _tree_params(p, seed))
    if family == "Gradient Boosting":
        ens = trees.EnsembleParams(p["num_estimators"], p["learning_rate"], _tree_params(p, seed))
        return trees.fit_gradient_boosting(X, y, ens, task=task)
    if family == "AdaBoost":
        ens = trees.EnsembleParams(p["num_estimators"], p["learning_rate"], trees.TreeParams(criterion="gini", random_state=seed))
        return trees.fit_adaboost(X, y, ens)
    if family == "Bernoulli Naive Bayes":
        return classic.fit_bernoulli_nb(X, y, p["alpha"], p["binarize"])
    if family == "KNN":
        return classic.fit_knn(X, y, p["k"])
    if family == "SVM":
        return classic.fit_svm_smo(X, y, classic.SVMParams(**p))
    if family in ("Neural Network", "Neural Network (non-paper variant)"):
        cfg = neural.MLPParams(
            hidden_sizes=tuple(p["hidden_sizes"]),
            epochs=p["epochs"],
            batch_size=p["batch_size"],
            learning_rate=p["learning_rate"],
            seed=seed,
            head="softmax" if task == CLASSIFICATION else "identity",
        )
        return neural.train_mlp(X, y, cfg)
    if family == "Multiple Linear Model":
        return linear.fit_ols(np.column_stack([np.ones(len(X)), X]), y)
    if family == "Majority Baseline":
        y = np.asarray(y, dtype=np.int64)
        n_pos = int(y.sum())
        return MajorityModel(1 if n_pos >= len(y) - n_pos else 0)
    raise ConfigError(f"unknown model family {family!r}")


@dataclass
class FittedLearner:
    family: str
    task: str
    params: dict
    model: Any
    scale: Optional[tuple] = None  # (mean, std) arrays learned on the training rows

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.scale is None:
            return X
        mean, std = self.scale
        return np.where(std > 0, (X - mean) / np.where(std > 0, std, 1.0), 0.0)

    def predict(self, X) -> np.ndarray:
        X = self.transform(np.asarray(getattr(X, "values", X), dtype=float))
        if self.family == "Multiple Linear Model":
            return linear.predict_ols(self.model, np.column_stack([np.ones(len(X)), X]))
        return self.model.predict(X)

    def importances(self) -> Optional[trees.ImportanceVector]:
        if FAMILIES[self.family].has_importances:
            return self.model.feature_importances()
        return None


def fit_learner(family: str, task: str, X, y, params: Optional[dict] = None, seed: int = 0) -> FittedLearner:
    """Fit one model family; scale-sensitive families standardize with training statistics."""
    p = resolve_params(family, task, params)
    arr = np.asarray(getattr(X, "values", X), dtype=float)
    target = np.asarray(getattr(y, "values", y))
    learner = FittedLearner(family, task, p, None)
    if FAMILIES[family].scaled:
        learner.scale = (arr.mean(axis=0), arr.std(axis=0))
    learner.model = _fit_model(family, task, p, learner.transform(arr), target, seed)
    return learner


# --- cross-validation -----------------------------------------------------


@dataclass(frozen=True)
class CVResult:
    fold_values: tuple
    mean: float
    std: float
    params: dict
    seed: int
    metric: str

    @property
    def k(self) -> int:
        return len(self.fold_values)


def cross_validate(
    family: str,
    task: str,
    X,
    y,
    k: int = 10,
    seed: int = 0,
    metric: str = "f1",
    params: Optional[dict] = None,
    model_seed: int = 0,
    return_models: bool = False,
):
    """k-fold CV; every learned statistic is fitted on the training folds only.

    Returns a ``CVResult``, or ``(CVResult, [FittedLearner])`` with
    ``return_models``.
    """
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}")
    arr = np.asarray(getattr(X, "values", X), dtype=float)
    target = np.asarray(getattr(y, "values", y))
    plan = kfold(len(arr), k, seed)
    folds = plan.folds
    values, models = [], []
    resolved = resolve_params(family, task, params)
    for i, test in enumerate(folds):
        train = np.concatenate([f for j, f in enumerate(folds) if j != i])
        try:
            learner = fit_learner(family, task, arr[train], target[train], resolved, model_seed)
            values.append(float(METRICS[metric](target[test], learner.predict(arr[test]))))
        except Exception as exc:  # annotate and re-raise with the fold index
            raise FoldError(i, exc) from exc
        if return_models:
            models.append(learner)
    v = np.asarray(values)
    result = CVResult(tuple(values), float(v.mean()), float(v.std()), resolved, int(seed), metric)
    return (result, models) if return_models else result


# --- search spaces --------------------------------------------------------


@dataclass(frozen=True)
class HyperparamSpace:
    """Per-parameter domains.

    A list is an explicit value set. A dict ``{"low", "high", "scale",
    "type"}`` is a range for random search; ``{"choice": [...]}`` samples
    from a list.
    """

    domains: dict

    def __post_init__(self):
        if not self.domains:
            raise EmptyGrid("search space has no parameters")
        for name, dom in self.domains.items():
            if isinstance(dom, list):
                if not dom:
                    raise EmptyGrid(f"parameter {name!r} has an empty value list")
            elif isinstance(dom, dict) and "choice" in dom:
                if not dom["choice"]:
                    raise EmptyGrid(f"parameter {name!r} has an empty choice list")
            elif isinstance(dom, dict):
                if not dom["low"] < dom["high"]:
                    raise ConfigError(f"parameter {name!r}: low must be < high")
                if dom.get("scale", "linear") == "log" and dom["low"] <= 0:
                    raise ConfigError(f"parameter {name!r}: log scale needs low > 0")
            else:
                raise ConfigError(f"parameter {name!r}: unsupported domain {dom!r}")

    @property
    def is_grid(self) -> bool:
        return all(isinstance(d, list) for d in self.domains.values())

    def grid(self) -> list[dict]:
        if not self.is_grid:
            raise ConfigError("grid search needs explicit value lists")
        names = sorted(self.domains)
        seen, out = set(), []
        for combo in itertools.product(*(self.domains[n] for n in names)):
            cand = dict(zip(names, combo))
            key = json.dumps(cand, sort_keys=True)
            if key not in seen:
                seen.add(key)
                out.append(cand)
        return out

    def sample(self, n_iter: int, seed: int) -> list[dict]:
        if n_iter < 1:
            raise ConfigError("n_iter must be >= 1")
        rng = np.random.default_rng(seed)
        names = sorted(self.domains)
        return [{n: _draw(self.domains[n], rng) for n in names} for _ in range(n_iter)]


def _py(v):
    return v.item() if isinstance(v, np.generic) else v


def _draw(dom, rng: np.random.Generator):
    if isinstance(dom, list):
        return _py(dom[int(rng.integers(len(dom)))])
    if "choice" in dom:
        return _py(dom["choice"][int(rng.integers(len(dom["choice"])))])
    low, high = dom["low"], dom["high"]
    is_int = dom.get("type", "float") == "int"
    if dom.get("scale", "linear") == "log":
        if is_int:
            u = rng.uniform(math.log(low), math.log(high + 1))
            return int(min(high, math.floor(math.exp(u))))
        return float(math.exp(rng.uniform(math.log(low), math.log(high))))
    if is_int:
        return int(rng.integers(low, high + 1))
    return float(rng.uniform(low, high))


def _resolve_tokens(dom, p: int):
    """Replace the token ``"p"`` (feature count) inside a domain."""
    if dom == "p":
        return p
    if isinstance(dom, list):
        return [_resolve_tokens(v, p) for v in dom]
    if isinstance(dom, dict):
        return {k: _resolve_tokens(v, p) for k, v in dom.items()}
    return dom


@lru_cache(maxsize=1)
def _space_file() -> dict:
    text = resources.files("altcite").joinpath("resources/search_spaces.json").read_text(encoding="utf-8")
    return json.loads(text)


def default_space(family: str, task: str, method: str, n_features: int) -> HyperparamSpace:
    """Shipped search space for a family/task, with ``"p"`` set to ``n_features``."""
    doc = _space_file()
    try:
        dom = doc[method][family][task]
    except KeyError:
        raise ConfigError(f"no default {method} space for {family} ({task})") from None
    dom = _resolve_tokens(dom, n_features)
    for name in ("max_features",):
        if isinstance(dom.get(name), list):
            dom[name] = [v for v in dom[name] if not isinstance(v, int) or v <= n_features] or [n_features]
    return HyperparamSpace(dom)


# --- search ---------------------------------------------------------------


def _order_key(params: dict) -> tuple:
    """Total order over parameter dicts: names sorted, None < numbers < strings."""
    key = []
    for name in sorted(params):
        v = params[name]
        if v is None:
            key.append((name, 0, 0.0, ""))
        elif isinstance(v, bool):
            key.append((name, 1, float(v), ""))
        elif isinstance(v, (int, float)):
            key.append((name, 1, float(v), ""))
        else:
            key.append((name, 2, 0.0, json.dumps(v, sort_keys=True)))
    return tuple(key)


@dataclass
class SearchResult:
    method: str
    candidates: list
    results: list  # CVResult per candidate, same order
    best_index: int
    metric: str
    seed: int

    @property
    def best_params(self) -> dict:
        return self.candidates[self.best_index]

    @property
    def best(self) -> CVResult:
        return self.results[self.best_index]


def _select(candidates: list, results: list) -> int:
    best = max(r.mean for r in results)
    tied = [i for i, r in enumerate(results) if r.mean == best]
    return min(tied, key=lambda i: (_order_key(candidates[i]), i))


def _evaluate(family, task, X, y, candidates, k, seed, metric, fixed, model_seed):
    cache: dict = {}
    results = []
    for cand in candidates:
        key = json.dumps(cand, sort_keys=True)
        if key not in cache:
            cache[key] = cross_validate(family, task, X, y, k, seed, metric, {**(fixed or {}), **cand}, model_seed)
        results.append(cache[key])
    return results


def grid_search(family, task, space, X, y, k=10, seed=0, metric="f1", fixed=None, model_seed=0) -> SearchResult:
    """Evaluate the deduplicated Cartesian product; ties go to the smallest parameter tuple."""
    if not isinstance(space, HyperparamSpace):
        space = HyperparamSpace(space)
    candidates = space.grid()
    if not candidates:
        raise EmptyGrid("grid has no candidates")
    results = _evaluate(family, task, X, y, candidates, k, seed, metric, fixed, model_seed)
    return SearchResult("grid", candidates, results, _select(candidates, results), metric, int(seed))


def random_search(family, task, space, X, y, n_iter=10, k=10, seed=0, metric="f1", fixed=None, model_seed=0, cv_seed=None) -> SearchResult:
    """``n_iter`` seeded draws from the space; ``cv_seed`` (default ``seed``) fixes the folds."""
    if not isinstance(space, HyperparamSpace):
        space = HyperparamSpace(space)
    candidates = space.sample(n_iter, seed)
    cv = seed if cv_seed is None else cv_seed
    results = _evaluate(family, task, X, y, candidates, k, cv, metric, fixed, model_seed)
    return SearchResult("random", candidates, results, _select(candidates, results), metric, int(seed))


def write_results_csv(search: SearchResult, path) -> None:
    """One row per (candidate, fold), then a summary row for the winner."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["candidate_id", "params_json", "fold", "metric_value"])
        for cid, (cand, res) in enumerate(zip(search.candidates, search.results)):
            for fold, value in enumerate(res.fold_values):
                w.writerow([cid, json.dumps(cand, sort_keys=True), fold, repr(float(value))])
        w.writerow([f"best:{search.best_index}", json.dumps(search.best_params, sort_keys=True), "mean", repr(search.best.mean)])
