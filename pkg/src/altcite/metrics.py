"""Confusion-matrix classification metrics and regression error metrics."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMatrix, LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    def swapped(self) -> "ConfusionMatrix":
        """The same predictions scored with the negative class as positive."""
        return ConfusionMatrix(tp=self.tn, fn=self.fp, fp=self.fn, tn=self.tp)


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    undefined: tuple = field(default=())

    def as_row(self) -> list[float]:
        return [self.accuracy, self.precision, self.recall, self.f1]


@dataclass(frozen=True)
class RegressionReport:
    mse: float
    mae: float
    r2: float
    r2_undefined: bool = False

    def as_row(self) -> list[float]:
        return [self.mse, self.mae, self.r2]


def _pair(y_true, y_pred, min_len: int = 1):
    a = np.asarray(y_true)
    b = np.asarray(y_pred)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"y_true has shape {a.shape}, y_pred has shape {b.shape}")
    if len(a) < min_len:
        raise LengthMismatch(f"need at least {min_len} pairs, got {len(a)}")
    return a, b


def confusion(y_true, y_pred) -> ConfusionMatrix:
    """Count outcomes with 1 as the positive class."""
    t, p = _pair(y_true, y_pred)
    t = t.astype(bool)
    p = p.astype(bool)
    return ConfusionMatrix(
        tp=int(np.sum(t & p)),
        fn=int(np.sum(t & ~p)),
        fp=int(np.sum(~t & p)),
        tn=int(np.sum(~t & ~p)),
    )


def f1_from(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when both inputs are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def classification_report(cm: ConfusionMatrix) -> ClassificationReport:
    """Accuracy, precision, recall and F1 of the positive class.

    A zero denominator yields 0 and the metric name is listed in
    ``undefined``.
    """
    if cm.total <= 0:
        raise EmptyMatrix("confusion matrix is empty")
    undefined = []
    accuracy = (cm.tp + cm.tn) / cm.total
    if cm.tp + cm.fp == 0:
        precision = 0.0
        undefined.append("precision")
    else:
        precision = cm.tp / (cm.tp + cm.fp)
    if cm.tp + cm.fn == 0:
        recall = 0.0
        undefined.append("recall")
    else:
        recall = cm.tp / (cm.tp + cm.fn)
    return ClassificationReport(accuracy, precision, recall, f1_from(precision, recall), tuple(undefined))


def regression_report(y_true, y_pred) -> RegressionReport:
    """MSE, MAE and R^2 = 1 - SSres/SStot over the evaluated set.

    Constant ``y_true`` leaves R^2 undefined: it is reported as 0 (or 1 for
    a perfect fit) with ``r2_undefined`` set.
    """
    t, p = _pair(y_true, y_pred, min_len=2)
    t = t.astype(float)
    p = p.astype(float)
    resid = t - p
    mse = float(np.mean(resid**2))
    mae = float(np.mean(np.abs(resid)))
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        return RegressionReport(mse, mae, 1.0 if ss_res == 0.0 else 0.0, True)
    return RegressionReport(mse, mae, 1.0 - ss_res / ss_tot)


def constant_report(n_pos: int, n_neg: int, label: int) -> ClassificationReport:
    """Analytic scores of a predictor that always outputs ``label``."""
    if label == 1:
        return classification_report(ConfusionMatrix(tp=n_pos, fn=0, fp=n_neg, tn=0))
    return classification_report(ConfusionMatrix(tp=0, fn=n_pos, fp=0, tn=n_neg))


def majority_report(n_pos: int, n_neg: int) -> ClassificationReport:
    """Analytic scores of a constant predictor of the larger class (ties: positive)."""
    return constant_report(n_pos, n_neg, 1 if n_pos >= n_neg else 0)


CLASSIFICATION_FIELDS = ("accuracy", "precision", "recall", "f1")
REGRESSION_FIELDS = ("mse", "mae", "r2")


def write_report_rows(path, rows) -> None:
    """CSV ``model,<metric fields>`` from ``(model, report)`` pairs at full precision.

    All reports must be of one kind; a ``None`` report writes empty cells.
    """
    rows = list(rows)
    kinds = {type(r) for _, r in rows if r is not None}
    if len(kinds) > 1:
        raise ValueError("cannot mix classification and regression reports")
    fields_ = REGRESSION_FIELDS if kinds == {RegressionReport} else CLASSIFICATION_FIELDS
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("model",) + fields_)
        for model, rep in rows:
            w.writerow([model] + ([""] * len(fields_) if rep is None else [repr(float(getattr(rep, f))) for f in fields_]))
