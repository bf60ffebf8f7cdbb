"""JSON envelope for fitted models: ``{format_version, model_type, params, payload}``."""

from __future__ import annotations

import json
from dataclasses import asdict, fields

import numpy as np

from .classic import KNNModel, NBModel, SVMModel, SVMParams
from .linear import OLSModel
from .neural import MLPModel, MLPParams
from .trees import (
    AdaBoostModel,
    EnsembleParams,
    ForestModel,
    GradientBoostingModel,
    Tree,
    TreeModel,
    TreeParams,
)

FORMAT_VERSION = 1


def _tree_params(d: dict) -> TreeParams:
    return TreeParams(**d)


def _ens_params(d: dict) -> EnsembleParams:
    d = dict(d)
    d["tree"] = _tree_params(d["tree"])
    return EnsembleParams(**d)


def _tree_payload(m: TreeModel) -> dict:
    return {
        "tree": m.tree.to_dict(),
        "task": m.task,
        "n_features": m.n_features,
        "n_classes": m.n_classes,
        "feature_names": list(m.feature_names),
    }


def _tree_from(payload: dict, params: TreeParams) -> TreeModel:
    return TreeModel(
        Tree.from_dict(payload["tree"]),
        payload["task"],
        payload["n_features"],
        payload["n_classes"],
        params,
        tuple(payload["feature_names"]),
    )


def _arr(x):
    return np.asarray(x, dtype=float).tolist()


def to_dict(model) -> dict:
    if isinstance(model, TreeModel):
        kind, params, payload = "tree", asdict(model.params), _tree_payload(model)
    elif isinstance(model, ForestModel):
        kind, params = "random_forest", asdict(model.params)
        payload = {
            "task": model.task,
            "n_features": model.n_features,
            "n_classes": model.n_classes,
            "feature_names": list(model.feature_names),
            "members": [{"params": asdict(t.params), **_tree_payload(t)} for t in model.trees],
        }
    elif isinstance(model, AdaBoostModel):
        kind, params = "adaboost", asdict(model.params)
        payload = {
            "n_features": model.n_features,
            "feature_names": list(model.feature_names),
            "alphas": list(model.alphas),
            "errors": list(model.errors),
            "members": [{"params": asdict(t.params), **_tree_payload(t)} for t in model.stumps],
        }
    elif isinstance(model, GradientBoostingModel):
        kind, params = "gradient_boosting", asdict(model.params)
        payload = {
            "init": model.init,
            "learning_rate": model.learning_rate,
            "task": model.task,
            "n_features": model.n_features,
            "feature_names": list(model.feature_names),
            "members": [{"params": asdict(t.params), **_tree_payload(t)} for t in model.trees],
        }
    elif isinstance(model, NBModel):
        kind, params = "bernoulli_nb", {"alpha": model.alpha, "binarize": model.binarize}
        payload = {
            "class_log_prior": _arr(model.class_log_prior),
            "feature_prob": _arr(model.feature_prob),
            "n_features": model.n_features,
        }
    elif isinstance(model, KNNModel):
        kind, params = "knn", {"k": model.k}
        payload = {
            "X": _arr(model.X),
            "y": np.asarray(model.y).tolist(),
            "mean": _arr(model.mean),
            "scale": _arr(model.scale),
            "n_features": model.n_features,
            "n_classes": model.n_classes,
        }
    elif isinstance(model, SVMModel):
        kind, params = "svm", asdict(model.params)
        payload = {
            "support_vectors": _arr(model.support_vectors),
            "dual_coef": _arr(model.dual_coef),
            "support": np.asarray(model.support).tolist(),
            "alpha": _arr(model.alpha),
            "bias": model.bias,
            "n_features": model.n_features,
            "converged": model.converged,
            "iterations": model.iterations,
        }
    elif isinstance(model, MLPModel):
        kind, params = "mlp", asdict(model.config)
        params["hidden_sizes"] = list(params["hidden_sizes"])
        payload = {
            "params": [_arr(p) for p in model.params],
            "n_features": model.n_features,
            "loss_history": list(model.loss_history),
        }
    elif isinstance(model, OLSModel):
        kind, params, payload = "ols", {}, model.to_dict()
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return {"format_version": FORMAT_VERSION, "model_type": kind, "params": params, "payload": payload}


def from_dict(doc: dict):
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('format_version')!r}")
    kind, params, p = doc["model_type"], doc["params"], doc["payload"]
    if kind == "tree":
        return _tree_from(p, _tree_params(params))
    if kind == "random_forest":
        members = [_tree_from(m, _tree_params(m["params"])) for m in p["members"]]
        return ForestModel(members, p["task"], p["n_features"], p["n_classes"], _ens_params(params), tuple(p["feature_names"]))
    if kind == "adaboost":
        members = [_tree_from(m, _tree_params(m["params"])) for m in p["members"]]
        return AdaBoostModel(members, list(p["alphas"]), list(p["errors"]), p["n_features"], _ens_params(params), tuple(p["feature_names"]))
    if kind == "gradient_boosting":
        members = [_tree_from(m, _tree_params(m["params"])) for m in p["members"]]
        return GradientBoostingModel(
            p["init"], members, p["learning_rate"], p["task"], p["n_features"], _ens_params(params), tuple(p["feature_names"])
        )
    if kind == "bernoulli_nb":
        return NBModel(
            np.asarray(p["class_log_prior"]), np.asarray(p["feature_prob"]), params["alpha"], params["binarize"], p["n_features"]
        )
    if kind == "knn":
        return KNNModel(
            np.asarray(p["X"], dtype=float).reshape(-1, p["n_features"]),
            np.asarray(p["y"], dtype=np.int64),
            params["k"],
            np.asarray(p["mean"]),
            np.asarray(p["scale"]),
            p["n_features"],
            p["n_classes"],
        )
    if kind == "svm":
        return SVMModel(
            np.asarray(p["support_vectors"], dtype=float).reshape(-1, p["n_features"]),
            np.asarray(p["dual_coef"]),
            np.asarray(p["support"], dtype=np.int64),
            np.asarray(p["alpha"]),
            p["bias"],
            SVMParams(**params),
            p["n_features"],
            p["converged"],
            p["iterations"],
        )
    if kind == "mlp":
        names = {f.name for f in fields(MLPParams)}
        config = MLPParams(**{k: v for k, v in params.items() if k in names})
        return MLPModel([np.asarray(a, dtype=float) for a in p["params"]], config, p["n_features"], list(p["loss_history"]))
    if kind == "ols":
        return OLSModel.from_dict(p)
    raise ValueError(f"unknown model type {kind!r}")


def dumps(model) -> str:
    return json.dumps(to_dict(model), sort_keys=True)


def loads(text: str):
    return from_dict(json.loads(text))


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model))
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
