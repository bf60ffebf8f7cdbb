import json

import numpy as np
import pytest

from altcite.classic import SVMParams, fit_bernoulli_nb, fit_knn, fit_svm_smo
from altcite.linear import fit_ols
from altcite.neural import MLPParams, train_mlp
from altcite.serialize import FORMAT_VERSION, dumps, load_model, loads, save_model
from altcite.trees import (
    EnsembleParams,
    TreeParams,
    fit_adaboost,
    fit_gradient_boosting,
    fit_random_forest,
    fit_tree,
)

rng = np.random.default_rng(0)
X = rng.normal(size=(40, 3))
Y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int)
YR = X @ [1.0, -1.0, 0.5]

FITTERS = {
    "tree": lambda: fit_tree(X, Y, TreeParams(max_depth=3)),
    "regression_tree": lambda: fit_tree(X, YR, TreeParams(criterion="mae", max_depth=2)),
    "forest": lambda: fit_random_forest(X, Y, EnsembleParams(num_estimators=4, tree=TreeParams(max_features="sqrt"))),
    "adaboost": lambda: fit_adaboost(X, Y, EnsembleParams(num_estimators=5)),
    "boosting": lambda: fit_gradient_boosting(X, Y, EnsembleParams(5, 0.1, TreeParams(criterion="friedman_mse", max_depth=2))),
    "boosting_regression": lambda: fit_gradient_boosting(
        X, YR, EnsembleParams(5, 0.1, TreeParams(criterion="mse", max_depth=2)), task="regression"
    ),
    "nb": lambda: fit_bernoulli_nb(X, Y, alpha=0.5),
    "knn": lambda: fit_knn(X, Y, k=3),
    "svm": lambda: fit_svm_smo(X, Y, SVMParams(kernel="rbf", gamma=0.5)),
    "mlp": lambda: train_mlp(X, Y, MLPParams(hidden_sizes=(4,), epochs=2)),
    "mlp_regression": lambda: train_mlp(X, YR, MLPParams(hidden_sizes=(4,), epochs=2, head="identity")),
}


@pytest.mark.parametrize("name", sorted(FITTERS))
def test_round_trip_preserves_predictions(name, tmp_path):
    model = FITTERS[name]()
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    np.testing.assert_array_equal(back.predict(X), model.predict(X))
    if hasattr(model, "predict_proba") and "regression" not in name:
        np.testing.assert_allclose(back.predict_proba(X), model.predict_proba(X), rtol=0, atol=0)
    assert dumps(back) == dumps(model)


def test_envelope_fields():
    doc = json.loads(dumps(FITTERS["tree"]()))
    assert set(doc) >= {"format_version", "model_type", "params", "payload"}
    assert doc["format_version"] == FORMAT_VERSION
    assert doc["model_type"] == "tree"


def test_ols_round_trip():
    design = np.column_stack([np.ones(40), X])
    m = fit_ols(design, YR)
    back = loads(dumps(m))
    np.testing.assert_array_equal(back.coefficients, m.coefficients)
    np.testing.assert_array_equal(back.standard_errors, m.standard_errors)


def test_rejects_unknown_version_and_type():
    doc = json.loads(dumps(FITTERS["nb"]()))
    with pytest.raises(Exception):
        loads(json.dumps({**doc, "format_version": 999}))
    with pytest.raises(Exception):
        loads(json.dumps({**doc, "model_type": "mystery"}))
