import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from altcite.errors import EmptyMatrix, LengthMismatch
from altcite.linear import fit_ols
from altcite.metrics import (
    ClassificationReport,
    ConfusionMatrix,
    RegressionReport,
    classification_report,
    confusion,
    f1_from,
    majority_report,
    regression_report,
    write_report_rows,
)


def test_confusion_counts():
    assert confusion([1, 1, 0, 0], [1, 0, 1, 0]) == ConfusionMatrix(tp=1, fn=1, fp=1, tn=1)
    cm = confusion([1, 0, 1], [1, 0, 1])
    assert cm.fn == cm.fp == 0
    cm = confusion([1, 1, 0, 0, 0], [1] * 5)
    assert (cm.tp, cm.fp) == (2, 3)


def test_confusion_length_mismatch():
    with pytest.raises(LengthMismatch):
        confusion([1, 0], [1])
    with pytest.raises(LengthMismatch):
        confusion([], [])


@pytest.mark.parametrize(
    "precision,recall,f1",
    [(0.811, 0.960, 0.879), (0.783, 1.000, 0.878)],
)
def test_f1_from_printed_precision_recall(precision, recall, f1):
    assert abs(f1_from(precision, recall) - f1) <= 0.0005


def test_majority_on_reference_counts():
    rep = majority_report(9779, 2595)
    assert rep.accuracy == pytest.approx(0.7903, abs=1e-4)
    assert rep.precision == pytest.approx(0.7903, abs=1e-4)
    assert rep.recall == 1.0
    assert rep.f1 == pytest.approx(0.8829, abs=1e-4)


def test_zero_denominators_are_flagged():
    rep = classification_report(ConfusionMatrix(tp=0, fn=0, fp=0, tn=5))
    assert rep.precision == rep.recall == rep.f1 == 0.0
    assert set(rep.undefined) == {"precision", "recall"}
    assert rep.accuracy == 1.0
    with pytest.raises(EmptyMatrix):
        classification_report(ConfusionMatrix(0, 0, 0, 0))


def test_regression_examples():
    rep = regression_report([0.0, 1.0], [2.0, 2.0])
    assert (rep.mse, rep.mae, rep.r2) == pytest.approx((2.5, 1.5, -9.0))
    y = np.array([1.0, 4.0, 2.0, 7.0])
    assert regression_report(y, np.full(4, y.mean())).r2 == pytest.approx(0.0, abs=1e-15)
    rep = regression_report(y, y)
    assert (rep.mse, rep.mae, rep.r2) == (0.0, 0.0, 1.0)


def test_regression_constant_target_is_flagged():
    rep = regression_report([3.0, 3.0, 3.0], [3.0, 2.0, 3.0])
    assert rep.r2_undefined
    with pytest.raises(LengthMismatch):
        regression_report([1.0], [1.0])


cms = st.builds(ConfusionMatrix, st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50)).filter(
    lambda c: c.total > 0
)


@given(cms)
def test_report_ranges_and_f1_bounds(cm):
    rep = classification_report(cm)
    for v in rep.as_row():
        assert 0.0 <= v <= 1.0
    if not rep.undefined:
        assert min(rep.precision, rep.recall) - 1e-12 <= rep.f1 <= max(rep.precision, rep.recall) + 1e-12
    assert (rep.f1 == 0.0) == (cm.tp == 0)
    assert (rep.f1 == 1.0) == (cm.fn == 0 and cm.fp == 0 and cm.tp > 0)


@given(cms)
def test_accuracy_survives_class_swap(cm):
    assert classification_report(cm).accuracy == classification_report(cm.swapped()).accuracy


def test_precision_recall_change_under_swap():
    cm = ConfusionMatrix(tp=5, fn=1, fp=3, tn=10)
    a, b = classification_report(cm), classification_report(cm.swapped())
    assert a.precision != b.precision and a.recall != b.recall


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40))
def test_self_report_is_all_ones_when_positive_present(y):
    rep = classification_report(confusion(y, y))
    assert rep.accuracy == 1.0
    if any(y):
        assert rep.as_row() == [1.0, 1.0, 1.0, 1.0]


@given(
    st.lists(st.integers(-1000, 1000).map(lambda v: v / 10), min_size=2, max_size=30),
    st.lists(st.integers(-1000, 1000).map(lambda v: v / 10), min_size=2, max_size=30),
)
def test_regression_invariants(a, b):
    n = min(len(a), len(b))
    rep = regression_report(a[:n], b[:n])
    assert rep.mse >= 0 and rep.mae >= 0
    assert rep.r2 <= 1.0
    if not rep.r2_undefined:
        assert (rep.r2 == 1.0) == (rep.mse == 0.0)


def test_r2_of_ols_with_intercept_is_nonnegative():
    rng = np.random.default_rng(5)
    X = np.column_stack([np.ones(80), rng.normal(size=(80, 3))])
    y = rng.normal(size=80)
    model = fit_ols(X, y)
    assert regression_report(y, X @ model.coefficients).r2 >= 0.0


def test_report_rows_csv(tmp_path):
    path = tmp_path / "m.csv"
    write_report_rows(path, [("A", ClassificationReport(0.5, 0.25, 1.0, 0.4)), ("B", None)])
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["model", "accuracy", "precision", "recall", "f1"]
    assert rows[1] == ["A", "0.5", "0.25", "1.0", "0.4"]
    assert rows[2] == ["B", "", "", "", ""]
    write_report_rows(path, [("OLS", RegressionReport(1.0, 0.5, 0.1))])
    assert next(csv.reader(path.open())) == ["model", "mse", "mae", "r2"]
