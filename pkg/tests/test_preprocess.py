import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from altcite.errors import BadK, DegenerateSplit, TooFewRows, UnknownFeature
from altcite.preprocess import (
    FeatureMatrix,
    SplitPlan,
    encode_categoricals,
    feature_matrix,
    holdout_split,
    kfold,
    label_above_median,
    label_nonzero,
    log1p_features,
    pearson_matrix,
    prune_collinear,
    standardize,
)
from conftest import make_dataset
from oracles import oracle_pearson


def fm(columns: dict) -> FeatureMatrix:
    return FeatureMatrix(np.column_stack(list(columns.values())).astype(float), tuple(columns))


# --- correlations ---------------------------------------------------------


def test_pearson_examples():
    assert pearson_matrix(fm({"a": [1, 2, 3], "b": [1, 2, 3]})).get("a", "b") == pytest.approx(1.0)
    assert pearson_matrix(fm({"a": [1, 2, 3], "b": [3, 2, 1]})).get("a", "b") == pytest.approx(-1.0)
    assert pearson_matrix(fm({"a": [1, 2, 3, 4], "b": [1, 3, 2, 4]})).get("a", "b") == pytest.approx(0.8)


def test_pearson_constant_column_flagged():
    cm = pearson_matrix(fm({"a": [1, 2, 3], "c": [5, 5, 5]}))
    assert cm.constant == (False, True)
    assert cm.get("a", "c") == 0.0
    assert cm.get("c", "c") == 0.0 and cm.get("a", "a") == 1.0


def test_pearson_needs_two_rows():
    with pytest.raises(TooFewRows):
        pearson_matrix(fm({"a": [1.0], "b": [2.0]}))


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(
    hnp.arrays(np.float64, st.tuples(st.integers(3, 12), st.integers(2, 4)), elements=finite),
    st.floats(0.1, 10.0),
    st.floats(-50.0, 50.0),
)
def test_pearson_affine_invariance_and_oracle(values, a, b):
    if np.any(values.std(axis=0) < 1e-3):
        return
    m = FeatureMatrix(values, tuple(f"f{i}" for i in range(values.shape[1])))
    r = pearson_matrix(m).values
    r2 = pearson_matrix(FeatureMatrix(values * a + b, m.feature_names)).values
    np.testing.assert_allclose(r, r2, atol=1e-10)
    np.testing.assert_allclose(r, r.T, atol=1e-15)
    assert np.all(np.abs(r) <= 1.0)
    np.testing.assert_allclose(np.diag(r), 1.0)
    assert r[0, 1] == pytest.approx(oracle_pearson(values[:, 0].tolist(), values[:, 1].tolist()), abs=1e-9)


# --- pruning --------------------------------------------------------------


def test_prune_nothing_above_threshold():
    m = fm({"a": [1, 2, 3, 4], "b": [1, 3, 2, 4], "c": [4, 1, 3, 2]})
    out, dropped = prune_collinear(m, 0.85)
    assert dropped == [] and out.feature_names == m.feature_names


def test_prune_three_identical_keeps_first():
    x = [1.0, 4.0, 2.0, 8.0, 5.0]
    m = fm({"a": x, "b": x, "c": x, "d": [3, 1, 4, 1, 5]})
    out, dropped = prune_collinear(m, 0.85)
    assert sorted(dropped) == ["b", "c"]
    assert "a" in out.feature_names


def test_prune_drops_the_broader_correlate():
    rng = np.random.default_rng(0)
    base = rng.normal(size=400)
    hub = base + 0.05 * rng.normal(size=400)
    twin = base + 0.05 * rng.normal(size=400)
    # side is built from hub, so hub has the larger mean |r| to the rest
    side = 0.6 * hub + 0.8 * rng.normal(size=400)
    out, dropped = prune_collinear(fm({"twin": twin, "hub": hub, "side": side}), 0.85)
    assert dropped == ["hub"]
    assert out.feature_names == ("twin", "side")


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(np.float64, st.tuples(st.integers(4, 15), st.integers(2, 6)), elements=st.integers(0, 5).map(float)), st.floats(0.3, 0.95))
def test_prune_leaves_no_pair_above_threshold(values, threshold):
    m = FeatureMatrix(values, tuple(f"f{i}" for i in range(values.shape[1])))
    out, dropped = prune_collinear(m, threshold)
    assert len(out.feature_names) + len(dropped) == values.shape[1]
    if out.shape[1] >= 2:
        r = np.abs(pearson_matrix(out).values)
        np.fill_diagonal(r, 0.0)
        assert r.max() < threshold


# --- encoding and transforms ---------------------------------------------


def test_encode_first_seen_order():
    ds = make_dataset(3, academic_status=["student", "postdoc", "student"])
    m, vocab = encode_categoricals(ds)
    assert m.column("academic_status").tolist() == [0, 1, 0]
    assert vocab["academic_status"] == {"student": 0, "postdoc": 1}


def test_encode_unseen_gets_next_code():
    vocab = {"academic_status": {"student": 0, "postdoc": 1}, "profession_twitter": {}, "platform_max_mentions": {}}
    ds = make_dataset(1, academic_status=["librarian"])
    m, _ = encode_categoricals(ds, vocab)
    assert m.column("academic_status").tolist() == [2]


def test_encode_empty_string_is_a_category():
    ds = make_dataset(3, academic_status=["", "x", ""])
    m, vocab = encode_categoricals(ds)
    assert m.column("academic_status").tolist() == [0, 1, 0]
    assert "" in vocab["academic_status"]


def test_feature_matrix_is_canonical():
    m, _ = feature_matrix(make_dataset(4), drop=["retweets"])
    assert "retweets" not in m.feature_names
    assert m.feature_names.index("academic_status") < m.feature_names.index("hashtags")


def test_log1p_examples():
    m = fm({"mendeley": [0.0, 8.0], "max_followers": [2406790.0, 0.0]})
    out = log1p_features(m, ["mendeley", "max_followers"])
    assert out.values[0, 0] == 0.0
    assert out.values[1, 0] == pytest.approx(2.19722, abs=1e-5)
    assert out.values[0, 1] == pytest.approx(math.log(2406791), abs=1e-12)
    assert out.values[0, 1] == pytest.approx(14.6938, abs=1e-4)
    assert out.transform_log == (True, True)


def test_log1p_unknown_feature():
    with pytest.raises(UnknownFeature):
        log1p_features(fm({"a": [1.0]}), ["b"])


@given(st.lists(st.integers(0, 10**7), min_size=2, max_size=30, unique=True))
def test_log1p_strictly_monotone(values):
    out = log1p_features(fm({"a": values}), ["a"]).values[:, 0]
    order = np.argsort(values)
    assert np.all(np.diff(out[order]) > 0)


def test_standardize_examples():
    out = standardize(fm({"a": [0.0, 2.0], "c": [3.0, 3.0]}))
    assert out.column("a").tolist() == [-1.0, 1.0]
    assert out.column("c").tolist() == [0.0, 0.0]
    again = standardize(out, out.standardized)
    z = fm({"z": [-1.0, 1.0]})
    np.testing.assert_allclose(standardize(z, standardize(z).standardized).values, z.values, atol=1e-12)
    assert again.standardized == out.standardized


def test_standardize_reuses_training_stats():
    train = standardize(fm({"a": [0.0, 2.0, 4.0]}))
    test = standardize(fm({"a": [2.0]}), train.standardized)
    assert test.values[0, 0] == 0.0


# --- labels ---------------------------------------------------------------


def test_label_nonzero():
    assert label_nonzero([0, 3, 0, 12]).values.tolist() == [0, 1, 0, 1]
    assert label_nonzero([1]).values.tolist() == [1]


def test_label_above_median_strict():
    labels, median = label_above_median([1, 2, 3])
    assert median == 2 and labels.values.tolist() == [0, 0, 1]
    labels, _ = label_above_median([8, 8, 9, 0, 20], median=8)
    assert labels.values.tolist() == [0, 0, 1, 0, 1]


@given(st.lists(st.integers(0, 100), min_size=1, max_size=50))
def test_above_median_at_most_half_when_attained(values):
    labels, median = label_above_median(values)
    if median in values:
        assert labels.values.sum() <= len(values) / 2


# --- splits ---------------------------------------------------------------


def test_holdout_sizes():
    plan = holdout_split(12374, 0.8, seed=1)
    assert (len(plan.train), len(plan.test)) == (9899, 2475)
    plan = holdout_split(10, 0.8, seed=1)
    assert (len(plan.train), len(plan.test)) == (8, 2)


def test_holdout_is_deterministic_and_serializable():
    a = holdout_split(50, 0.8, seed=4)
    b = holdout_split(50, 0.8, seed=4)
    assert a.to_json() == b.to_json()
    back = SplitPlan.from_dict(json.loads(a.to_json()))
    np.testing.assert_array_equal(back.train, a.train)
    assert json.loads(a.to_json())["kind"] == "holdout"


def test_holdout_degenerate():
    with pytest.raises(DegenerateSplit):
        holdout_split(1, 0.5, seed=0)
    with pytest.raises(DegenerateSplit):
        holdout_split(3, 0.1, seed=0)


def test_kfold_sizes():
    sizes = sorted(len(f) for f in kfold(12374, 10, seed=0).folds)
    assert sizes == [1237] * 6 + [1238] * 4
    assert all(len(f) == 1 for f in kfold(10, 10, seed=0).folds)


def test_kfold_bad_k():
    with pytest.raises(BadK):
        kfold(5, 1, seed=0)
    with pytest.raises(BadK):
        kfold(5, 6, seed=0)


@given(st.integers(2, 200), st.floats(0.05, 0.95), st.integers(0, 2**32))
def test_holdout_partitions(n, ratio, seed):
    try:
        plan = holdout_split(n, ratio, seed)
    except DegenerateSplit:
        assert math.floor(ratio * n + 1e-9) in (0, n)
        return
    assert sorted(plan.train.tolist() + plan.test.tolist()) == list(range(n))
    assert len(plan.train) == math.floor(ratio * n + 1e-9)


@given(st.integers(2, 200), st.data())
def test_kfold_partitions(n, data):
    k = data.draw(st.integers(2, n))
    seed = data.draw(st.integers(0, 2**32))
    folds = kfold(n, k, seed).folds
    assert len(folds) == k
    assert sorted(np.concatenate(folds).tolist()) == list(range(n))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    again = kfold(n, k, seed).folds
    assert all(np.array_equal(a, b) for a, b in zip(folds, again))
