"""From records to model-ready matrices: correlation, pruning, encoding,
transforms, labels and splits."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import schema
from .data import Dataset
from .errors import BadK, DegenerateSplit, TooFewRows, UnknownFeature
from .stats import pearson_array, quantile

DEFAULT_PRUNE_THRESHOLD = 0.85
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    feature_names: tuple
    transform_log: tuple = ()
    standardized: Optional[tuple] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D array")
        names = tuple(self.feature_names)
        if values.shape[1] != len(names):
            raise ValueError(f"{values.shape[1]} columns but {len(names)} feature names")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature matrix contains non-finite values")
        log = tuple(self.transform_log) or (False,) * len(names)
        if len(log) != len(names):
            raise ValueError("transform_log length mismatch")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "transform_log", log)

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def __len__(self) -> int:
        return self.values.shape[0]

    def index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise UnknownFeature(f"unknown feature {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index(name)]

    def select(self, names: Sequence[str]) -> "FeatureMatrix":
        idx = [self.index(n) for n in names]
        std = None if self.standardized is None else tuple(self.standardized[i] for i in idx)
        return FeatureMatrix(
            self.values[:, idx], tuple(names), tuple(self.transform_log[i] for i in idx), std
        )

    def drop(self, names: Sequence[str]) -> "FeatureMatrix":
        gone = set(names)
        return self.select([n for n in self.feature_names if n not in gone])

    def rows(self, indices) -> "FeatureMatrix":
        return FeatureMatrix(self.values[np.asarray(indices, dtype=int)], self.feature_names, self.transform_log, self.standardized)

    def hstack(self, other: "FeatureMatrix") -> "FeatureMatrix":
        std = None
        if self.standardized is not None or other.standardized is not None:
            std = (self.standardized or (None,) * self.shape[1]) + (other.standardized or (None,) * other.shape[1])
        return FeatureMatrix(
            np.hstack([self.values, other.values]),
            self.feature_names + other.feature_names,
            self.transform_log + other.transform_log,
            std,
        )

    def with_intercept(self, name: str = "const") -> "FeatureMatrix":
        ones = FeatureMatrix(np.ones((len(self), 1)), (name,))
        return ones.hstack(self)

    def reorder_canonical(self) -> "FeatureMatrix":
        order = sorted(range(len(self.feature_names)), key=lambda i: (schema.canonical_index(self.feature_names[i]), i))
        return self.select([self.feature_names[i] for i in order])


@dataclass(frozen=True)
class LabelVector:
    task: str
    values: np.ndarray
    positive_label_meaning: str = ""
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.task not in ("binary", "continuous"):
            raise ValueError(f"unknown task {self.task!r}")
        values = np.asarray(self.values, dtype=float if self.task == "continuous" else np.int64)
        if self.task == "binary" and not np.all((values == 0) | (values == 1)):
            raise ValueError("binary labels must be 0 or 1")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def rows(self, indices) -> "LabelVector":
        return LabelVector(self.task, self.values[np.asarray(indices, dtype=int)], self.positive_label_meaning, self.threshold)


@dataclass(frozen=True)
class CorrelationMatrix:
    values: np.ndarray
    feature_names: tuple
    constant: tuple

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.feature_names.index(a), self.feature_names.index(b)])


@dataclass(frozen=True)
class SplitPlan:
    kind: str
    seed: int
    n: int
    indices: dict = field(default_factory=dict)
    ratio: Optional[float] = None
    k: Optional[int] = None

    @property
    def train(self) -> np.ndarray:
        return np.asarray(self.indices["train"], dtype=int)

    @property
    def test(self) -> np.ndarray:
        return np.asarray(self.indices["test"], dtype=int)

    @property
    def folds(self) -> list[np.ndarray]:
        return [np.asarray(f, dtype=int) for f in self.indices["folds"]]

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "seed": int(self.seed), "n": int(self.n)}
        if self.ratio is not None:
            d["ratio"] = self.ratio
        if self.k is not None:
            d["k"] = self.k
        d["indices"] = {k: ([[int(i) for i in f] for f in v] if k == "folds" else [int(i) for i in v]) for k, v in self.indices.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SplitPlan":
        return cls(kind=d["kind"], seed=int(d["seed"]), n=int(d["n"]), indices=d["indices"], ratio=d.get("ratio"), k=d.get("k"))


# --- matrices from datasets ----------------------------------------------


def numeric_matrix(ds: Dataset, features: Optional[Sequence[str]] = None) -> FeatureMatrix:
    names = tuple(features) if features is not None else schema.NUMERIC
    for n in names:
        if n not in schema.NUMERIC:
            raise UnknownFeature(f"{n!r} is not a numeric feature")
    return FeatureMatrix(np.column_stack([ds.column(n) for n in names]), names)


def encode_categoricals(ds: Dataset, vocab: Optional[dict] = None) -> tuple[FeatureMatrix, dict]:
    """Integer-code the categorical features.

    Without ``vocab`` codes follow first-seen order. With a stored ``vocab``,
    categories it has not seen get code ``len(vocab[feature])``.
    """
    fitted = {}
    columns = []
    for name in schema.CATEGORICAL:
        values = [getattr(r, name) for r in ds.records]
        if vocab is None:
            mapping = {}
            for v in values:
                if v not in mapping:
                    mapping[v] = len(mapping)
        else:
            mapping = dict(vocab[name])
        unseen = len(mapping)
        columns.append([mapping.get(v, unseen) for v in values])
        fitted[name] = mapping
    matrix = FeatureMatrix(np.asarray(columns, dtype=float).T, schema.CATEGORICAL)
    return matrix, fitted


def feature_matrix(ds: Dataset, vocab: Optional[dict] = None, drop: Sequence[str] = ()) -> tuple[FeatureMatrix, dict]:
    """Numeric features plus categorical codes, in canonical column order."""
    gone = set(drop)
    numeric = numeric_matrix(ds, [n for n in schema.NUMERIC if n not in gone])
    cats, vocab = encode_categoricals(ds, vocab)
    cats = cats.drop([n for n in cats.feature_names if n in gone])
    return numeric.hstack(cats).reorder_canonical(), vocab


# --- correlation and pruning ----------------------------------------------


def pearson_matrix(m: FeatureMatrix) -> CorrelationMatrix:
    if len(m) < 2:
        raise TooFewRows("need at least 2 rows for correlations")
    r, constant = pearson_array(m.values)
    return CorrelationMatrix(r, m.feature_names, tuple(bool(c) for c in constant))


def prune_collinear(m: FeatureMatrix, threshold: float = DEFAULT_PRUNE_THRESHOLD) -> tuple[FeatureMatrix, list[str]]:
    """Drop features until no pair has ``|r| >= threshold``.

    The most correlated pair is resolved first: the member with the larger
    mean absolute correlation to the remaining features goes, and on a tie the
    later column goes. Column order of ``m`` is taken as canonical.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    dropped: list[str] = []
    current = m
    while current.shape[1] >= 2 and len(current) >= 2:
        a = np.abs(pearson_matrix(current).values)
        np.fill_diagonal(a, 0.0)
        upper = np.triu(a, k=1)
        best = upper.max()
        if best < threshold:
            break
        cand = np.argwhere(upper >= best - _TIE_TOL)
        i, j = (int(v) for v in cand[0])
        mac = a.sum(axis=1) / (a.shape[0] - 1)
        if mac[i] > mac[j] + _TIE_TOL:
            victim = i
        elif mac[j] > mac[i] + _TIE_TOL:
            victim = j
        else:
            victim = max(i, j)
        name = current.feature_names[victim]
        dropped.append(name)
        current = current.drop([name])
    return current, dropped


# --- transforms -----------------------------------------------------------


def log1p_features(m: FeatureMatrix, features: Sequence[str]) -> FeatureMatrix:
    values = m.values.copy()
    log = list(m.transform_log)
    for name in features:
        j = m.index(name)
        if np.any(values[:, j] < 0):
            raise ValueError(f"feature {name!r} has negative values; ln(1+x) needs x >= 0")
        values[:, j] = np.log1p(values[:, j])
        log[j] = True
    return FeatureMatrix(values, m.feature_names, tuple(log), m.standardized)


def standardize(m: FeatureMatrix, stats: Optional[Sequence] = None) -> FeatureMatrix:
    """z-score each column with population std; zero-variance columns map to 0.

    Pass the ``standardized`` attribute of a training matrix as ``stats`` to
    apply its statistics to other data.
    """
    x = m.values
    if stats is None:
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        stats = tuple((float(a), float(b)) for a, b in zip(mean, std))
    else:
        stats = tuple((float(a), float(b)) for a, b in stats)
        if len(stats) != x.shape[1]:
            raise ValueError("stats length does not match the feature count")
        mean = np.array([s[0] for s in stats])
        std = np.array([s[1] for s in stats])
    safe = np.where(std > 0, std, 1.0)
    z = np.where(std > 0, (x - mean) / safe, 0.0)
    return FeatureMatrix(z, m.feature_names, m.transform_log, stats)


# --- labels ---------------------------------------------------------------


def _counts(citations) -> np.ndarray:
    c = np.asarray(citations, dtype=float)
    if np.any(c < 0):
        raise ValueError("citation counts must be non-negative")
    return c


def label_nonzero(citations) -> LabelVector:
    c = _counts(citations)
    return LabelVector("binary", (c >= 1).astype(np.int64), ">=1 citation")


def label_above_median(citations, median: Optional[float] = None) -> tuple[LabelVector, float]:
    """Label 1 iff the count is strictly above the median.

    ``median`` defaults to the linear-interpolation median of ``citations``;
    pass a value to apply a threshold learned elsewhere.
    """
    c = _counts(citations)
    if median is None:
        median = float(quantile(c, 0.5))
    labels = LabelVector("binary", (c > median).astype(np.int64), f">{median:g} citations", threshold=float(median))
    return labels, float(median)


def target_log1p(citations) -> LabelVector:
    return LabelVector("continuous", np.log1p(_counts(citations)), "ln(1 + citations)")


# --- splits ---------------------------------------------------------------


def holdout_split(n: int, ratio: float, seed: int) -> SplitPlan:
    if not 0.0 < ratio < 1.0:
        raise DegenerateSplit(f"ratio must lie in (0, 1), got {ratio}")
    n_train = math.floor(ratio * n + 1e-9)
    if n < 2 or n_train < 1 or n_train >= n:
        raise DegenerateSplit(f"split of n={n} at ratio {ratio} leaves an empty side")
    perm = np.random.default_rng(seed).permutation(n)
    return SplitPlan("holdout", int(seed), int(n), {"train": perm[:n_train].tolist(), "test": perm[n_train:].tolist()}, ratio=float(ratio))


def kfold(n: int, k: int, seed: int) -> SplitPlan:
    if not 2 <= k <= n:
        raise BadK(f"k must satisfy 2 <= k <= n (k={k}, n={n})")
    perm = np.random.default_rng(seed).permutation(n)
    folds = [f.tolist() for f in np.array_split(perm, k)]
    return SplitPlan("kfold", int(seed), int(n), {"folds": folds}, k=int(k))
