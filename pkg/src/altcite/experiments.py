"""End-to-end experiments: citation classification, median classification and
log-citation regression, plus report writers."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import schema
from .data import Dataset
from .errors import ConfigError, StageError
from .linear import display_term, write_coefficient_csv
from .metrics import (
    ClassificationReport,
    RegressionReport,
    classification_report,
    confusion,
    constant_report,
    regression_report,
    write_report_rows,
)
from .preprocess import (
    feature_matrix,
    holdout_split,
    label_above_median,
    label_nonzero,
    log1p_features,
    numeric_matrix,
    prune_collinear,
    target_log1p,
)
from .trees import ImportanceVector
from .tuning import (
    CLASSIFICATION,
    REGRESSION,
    FAMILIES,
    HyperparamSpace,
    default_space,
    fit_learner,
    grid_search,
    random_search,
    write_results_csv,
)

log = logging.getLogger(__name__)

EXPERIMENTS = ("exp1_nonzero", "exp2_median", "exp3_regression")
CLASSIFIERS = (
    "Random Forest",
    "Decision Tree",
    "Gradient Boosting",
    "AdaBoost",
    "Bernoulli Naive Bayes",
    "KNN",
    "Neural Network",
    "SVM",
)
REGRESSORS = ("Random Forest", "Decision Tree", "Multiple Linear Model", "Neural Network (non-paper variant)")
TUNED = {CLASSIFICATION: ("Random Forest", "Decision Tree", "Gradient Boosting"), REGRESSION: ("Random Forest", "Decision Tree")}
BASELINE = "Majority Baseline"
CLASSIFICATION_COLUMNS = ("Accuracy", "Precision", "Recall", "F-1")
REGRESSION_COLUMNS = ("MSE", "MAE", "R-squared")
DEFAULT_SEEDS = {"split": 1, "tune": 2, "model": 3}


# --- configuration --------------------------------------------------------


@dataclass
class TuningConfig:
    method: str = "random"
    n_iter: int = 10
    k: int = 10
    metric: Optional[str] = None  # default: f1 or neg_mse by task
    space: Optional[dict] = None  # default: the shipped space for the family

    def __post_init__(self):
        if self.method not in ("random", "grid"):
            raise ConfigError(f"unknown tuning method {self.method!r}")
        if self.n_iter < 1 or self.k < 2:
            raise ConfigError("tuning needs n_iter >= 1 and k >= 2")


@dataclass
class ModelConfig:
    name: str
    params: dict = field(default_factory=dict)
    tuning: Optional[TuningConfig] = None


@dataclass
class ExperimentConfig:
    experiment: str = "exp1_nonzero"
    year: int = 2017
    models: list = field(default_factory=list)
    seeds: dict = field(default_factory=lambda: dict(DEFAULT_SEEDS))
    holdout_ratio: float = 0.8
    median_scope: str = "global"  # "global" or "train"
    prune_threshold: float = 0.85

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.year not in schema.CITATION_YEARS:
            raise ConfigError(f"year must be one of {schema.CITATION_YEARS}")
        if self.median_scope not in ("global", "train"):
            raise ConfigError("median_scope must be 'global' or 'train'")
        if set(self.seeds) != set(DEFAULT_SEEDS):
            raise ConfigError("seeds must name exactly: split, tune, model")
        if not self.models:
            self.models = default_models(self.experiment)
        names = [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise ConfigError("each model may appear only once")
        for m in self.models:
            if m.name not in FAMILIES:
                raise ConfigError(f"unknown model {m.name!r}")

    @property
    def task(self) -> str:
        return REGRESSION if self.experiment == "exp3_regression" else CLASSIFICATION

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        models = []
        for m in d.pop("models", []) or []:
            m = dict(m)
            tuning = m.pop("tuning", None)
            models.append(ModelConfig(tuning=TuningConfig(**tuning) if tuning else None, **m))
        known = {"experiment", "year", "seeds", "holdout_ratio", "median_scope", "prune_threshold"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "seeds" in d:
            d["seeds"] = {**DEFAULT_SEEDS, **d["seeds"]}
        return cls(models=models, **d)


def default_models(experiment: str, tuning: Optional[TuningConfig] = TuningConfig()) -> list:
    task = REGRESSION if experiment == "exp3_regression" else CLASSIFICATION
    names = REGRESSORS if task == REGRESSION else CLASSIFIERS
    return [ModelConfig(n, {}, tuning if (tuning and n in TUNED[task]) else None) for n in names]


# --- results --------------------------------------------------------------


@dataclass
class ReportRow:
    model: str
    metrics: Optional[dict]  # column name -> value
    error: Optional[str] = None
    params: Optional[dict] = None
    cv_mean: Optional[float] = None


@dataclass
class ReportTable:
    experiment: str
    year: int
    task: str
    rows: list
    config: dict
    notes: dict

    @property
    def columns(self) -> tuple:
        return REGRESSION_COLUMNS if self.task == REGRESSION else CLASSIFICATION_COLUMNS

    def row(self, model: str) -> ReportRow:
        for r in self.rows:
            if r.model == model:
                return r
        raise KeyError(model)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "year": self.year,
            "task": self.task,
            "columns": list(self.columns),
            "rows": [asdict(r) for r in self.rows],
            "config": self.config,
            "notes": self.notes,
        }


@dataclass
class ExperimentResult:
    report: ReportTable
    importances: dict  # model -> ImportanceVector
    feature_names: tuple
    searches: dict = field(default_factory=dict)
    ols: object = None
    timing: dict = field(default_factory=dict)
    learners: dict = field(default_factory=dict)


# --- pipeline -------------------------------------------------------------


def _stage(name):
    def wrap(fn):
        def inner(*a, **kw):
            try:
                return fn(*a, **kw)
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc

        return inner

    return wrap


@_stage("prune")
def _prune(ds: Dataset, threshold: float) -> list:
    _, dropped = prune_collinear(numeric_matrix(ds), threshold)
    return dropped


def design_matrices(ds: Dataset, train_idx, test_idx, dropped, log_transform: bool):
    """Train/test feature matrices; the categorical vocabulary is learned on train only."""
    train_m, vocab = feature_matrix(ds.subset(train_idx), drop=dropped)
    test_m, _ = feature_matrix(ds.subset(test_idx), vocab=vocab, drop=dropped)
    if log_transform:
        logged = [f for f in schema.LOG_FEATURES if f in train_m.feature_names]
        train_m = log1p_features(train_m, logged)
        test_m = log1p_features(test_m, logged)
    return train_m, test_m, vocab


def _metrics_row(task: str, y_true, y_pred) -> dict:
    if task == REGRESSION:
        r = regression_report(y_true, y_pred)
        out = dict(zip(REGRESSION_COLUMNS, (r.mse, r.mae, r.r2)))
        if r.r2_undefined:
            out["r2_undefined"] = True
        return out
    r = classification_report(confusion(y_true, y_pred))
    out = dict(zip(CLASSIFICATION_COLUMNS, r.as_row()))
    if r.undefined:
        out["undefined"] = list(r.undefined)
    return out


def _tune(mc: ModelConfig, task: str, X, y, seeds: dict):
    t = mc.tuning
    metric = t.metric or ("f1" if task == CLASSIFICATION else "neg_mse")
    if t.space is not None:
        space = HyperparamSpace(t.space)
    else:
        space = default_space(mc.name, task, t.method, X.shape[1])
    if t.method == "grid":
        return grid_search(mc.name, task, space, X, y, t.k, seeds["tune"], metric, mc.params, seeds["model"])
    return random_search(mc.name, task, space, X, y, t.n_iter, t.k, seeds["tune"], metric, mc.params, seeds["model"])


def _notes(config: ExperimentConfig) -> dict:
    notes = {
        "metric_rounding": "report.csv and report.md show 3 decimals; report.json keeps full precision",
        "seed_roles": {"split": "holdout permutation", "tune": "search draws and CV folds", "model": "model randomness"},
    }
    names = {m.name for m in config.models}
    if "AdaBoost" in names:
        notes["adaboost_variant"] = "discrete two-class boosting of depth-1 stumps; 50 rounds, learning rate 1.0 unless configured"
    if "SVM" in names:
        notes["svm_degree"] = "degree is recorded but has no effect on the sigmoid kernel"
    if "Neural Network (non-paper variant)" in names:
        notes["nn_regressor"] = "single identity output; architecture of the published regressor is unknown"
    if "Gradient Boosting" in names:
        notes["gradient_boosting_leaves"] = "stage leaves hold mean negative gradients (no Newton step)"
    return notes


def run_experiment(ds: Dataset, config: ExperimentConfig) -> ExperimentResult:
    task = config.task
    column = schema.CITATION_COLUMNS[config.year]
    if not ds.has_column(column):
        raise StageError("label", ConfigError(f"dataset has no {column} values"))
    citations = ds.column(column)
    seeds = config.seeds
    notes = _notes(config)

    dropped = _prune(ds, config.prune_threshold)
    notes["dropped_features"] = dropped
    try:
        plan = holdout_split(len(ds), config.holdout_ratio, seeds["split"])
    except Exception as exc:
        raise StageError("split", exc) from exc
    train_idx, test_idx = plan.train, plan.test

    try:
        if config.experiment == "exp1_nonzero":
            labels = label_nonzero(citations).values
        elif config.experiment == "exp2_median":
            scope = citations if config.median_scope == "global" else citations[train_idx]
            _, median = label_above_median(scope)
            labels = label_above_median(citations, median)[0].values
            notes["median"] = median
            notes["median_scope"] = config.median_scope
            if config.median_scope == "global":
                notes["median_leak"] = "median computed on the full dataset, so one scalar crosses the split"
        else:
            labels = target_log1p(citations).values
    except Exception as exc:
        raise StageError("label", exc) from exc

    try:
        train_m, test_m, _ = design_matrices(ds, train_idx, test_idx, dropped, task == REGRESSION)
    except Exception as exc:
        raise StageError("encode", exc) from exc
    X_train, X_test = train_m.values, test_m.values
    y_train, y_test = labels[train_idx], labels[test_idx]
    names = train_m.feature_names
    if task == CLASSIFICATION:
        notes["class_counts"] = {
            "train": {"positive": int(y_train.sum()), "negative": int(len(y_train) - y_train.sum())},
            "test": {"positive": int(y_test.sum()), "negative": int(len(y_test) - y_test.sum())},
        }

    rows, importances, searches, timing, learners = [], {}, {}, {}, {}
    ols = None
    for mc in config.models:
        start = time.perf_counter()
        row = ReportRow(mc.name, None)
        try:
            params = dict(mc.params)
            if mc.tuning is not None:
                search = _tune(mc, task, X_train, y_train, seeds)
                searches[mc.name] = search
                params.update(search.best_params)
                row.cv_mean = search.best.mean
            learner = fit_learner(mc.name, task, X_train, y_train, params, seeds["model"])
            row.params = learner.params
            row.metrics = _metrics_row(task, y_test, learner.predict(X_test))
            imp = learner.importances()
            if imp is not None:
                importances[mc.name] = ImportanceVector(imp.values, names, imp.all_zero)
            if mc.name == "Multiple Linear Model":
                ols = learner.model
            learners[mc.name] = learner
        except Exception as exc:
            cause = exc.cause if isinstance(exc, StageError) else exc
            row.error = f"{type(cause).__name__}: {cause}"
            log.warning("%s failed: %s", mc.name, row.error)
        timing[mc.name] = time.perf_counter() - start
        rows.append(row)

    if task == CLASSIFICATION:
        majority = 1 if y_train.sum() * 2 >= len(y_train) else 0
        rows.append(ReportRow(BASELINE, _metrics_row(task, y_test, np.full(len(y_test), majority)), params={"label": majority}))
        notes["baseline_analytic"] = dict(
            zip(CLASSIFICATION_COLUMNS, constant_report(int(y_test.sum()), int(len(y_test) - y_test.sum()), majority).as_row())
        )

    if ols is not None:
        ols = _relabel_ols(ols, names)
    report = ReportTable(config.experiment, config.year, task, rows, config.to_dict(), notes)
    return ExperimentResult(report, importances, names, searches, ols, timing, learners)


def _relabel_ols(model, names):
    from dataclasses import replace

    return replace(model, feature_names=("const",) + tuple(names))


def run_classification_experiment(ds: Dataset, config: ExperimentConfig) -> ExperimentResult:
    if config.task != CLASSIFICATION:
        raise ConfigError(f"{config.experiment} is not a classification experiment")
    return run_experiment(ds, config)


def run_regression_experiment(ds: Dataset, config: ExperimentConfig) -> ExperimentResult:
    if config.task != REGRESSION:
        raise ConfigError(f"{config.experiment} is not a regression experiment")
    return run_experiment(ds, config)


# --- rankings and horizon comparison --------------------------------------


@dataclass
class Ranking:
    models: tuple
    features: tuple  # ordered by average rank
    ranks: dict  # model -> {feature: rank}
    average: dict  # feature -> average rank

    def rows(self) -> list:
        return [[f] + [self.ranks[m][f] for m in self.models] + [self.average[f]] for f in self.features]


def _canon(name: str, names) -> tuple:
    return (schema.canonical_index(name), list(names).index(name))


def rank_vector(values, names) -> dict:
    """1-based ranks, descending importance, ties by canonical feature order."""
    order = sorted(range(len(names)), key=lambda i: (-float(values[i]), _canon(names[i], names)))
    return {names[i]: r + 1 for r, i in enumerate(order)}


def importance_ranking(vectors: dict, feature_names=None) -> Ranking:
    """Per-model ranks and their average.

    Vectors flagged ``all_zero`` (models that never split) carry no ordering
    and are left out, unless every vector is flagged.
    """
    if not vectors:
        raise ValueError("no importance vectors to rank")
    informative = [m for m, v in vectors.items() if not getattr(v, "all_zero", False)]
    models = tuple(informative or vectors)
    ranks = {}
    for m in models:
        v = vectors[m]
        names = tuple(feature_names or getattr(v, "feature_names", ()))
        ranks[m] = rank_vector(getattr(v, "values", v), names)
    names = tuple(ranks[models[0]])
    average = {f: float(np.mean([ranks[m][f] for m in models])) for f in names}
    ordered = tuple(sorted(names, key=lambda f: (average[f], _canon(f, names))))
    return Ranking(models, ordered, ranks, average)


@dataclass
class HorizonComparison:
    short: ExperimentResult
    long: ExperimentResult
    deltas: dict  # model -> {column: short - long}


def compare_horizons(ds: Dataset, config: ExperimentConfig) -> HorizonComparison:
    """Run the experiment for both citation years; deltas are 2017 minus 2020."""
    base = config.to_dict()
    results = {}
    for year in schema.CITATION_YEARS:
        results[year] = run_experiment(ds, ExperimentConfig.from_dict({**base, "year": year}))
    short, long_ = results[2017], results[2020]
    deltas = {}
    for row in short.report.rows:
        other = long_.report.row(row.model)
        if row.metrics is None or other.metrics is None:
            deltas[row.model] = None
            continue
        deltas[row.model] = {c: row.metrics[c] - other.metrics[c] for c in short.report.columns}
    return HorizonComparison(short, long_, deltas)


# --- writers --------------------------------------------------------------


def slug(name: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in name.lower()).strip("_")


def _fmt(v) -> str:
    return f"{v:.3f}"


def _table_rows(report: ReportTable) -> list:
    out = []
    for r in report.rows:
        if r.metrics is None:
            out.append([r.model] + [""] * len(report.columns) + [r.error or ""])
        else:
            out.append([r.model] + [_fmt(r.metrics[c]) for c in report.columns] + [""])
    return out


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _md_table(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def report_markdown(result: ExperimentResult) -> str:
    rep = result.report
    parts = [f"# {rep.experiment} ({rep.year} citations)", ""]
    rows = _table_rows(rep)
    parts.append(_md_table(["Model", *rep.columns], [r[:-1] for r in rows]))
    failures = [r for r in rep.rows if r.error]
    if failures:
        parts += ["", "Failures:", ""] + [f"- {r.model}: {r.error}" for r in failures]
    if result.ols is not None:
        parts += ["", "## Multiple linear model coefficients", ""]
        coef_rows = [
            [display_term(n), f"{b:.4f}", f"{s:.3f}", f"{t:.3f}"] for n, b, s, t in result.ols.coefficient_rows()
        ]
        parts.append(_md_table(["Term", "Coefficient", "Standard Error", "t-value"], coef_rows))
    if result.importances:
        ranking = importance_ranking(result.importances)
        parts += ["", "## Feature importance ranks", ""]
        parts.append(
            _md_table(
                ["Feature", *ranking.models, "Average rank"],
                [[schema.DISPLAY_NAMES.get(r[0], r[0]), *r[1:-1], f"{r[-1]:.2f}"] for r in ranking.rows()],
            )
        )
    parts += ["", "## Notes", ""]
    for key, value in rep.notes.items():
        parts.append(f"- {key}: {json.dumps(_json_safe(value), sort_keys=True)}")
    return "\n".join(parts) + "\n"


def write_reports(result: ExperimentResult, out_dir, formats=("csv", "json", "md")) -> list:
    """Write report files plus importance, tuning and coefficient CSVs.

    Wall-clock times go to ``timing.json`` so the report files stay
    byte-identical across runs.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    rep = result.report
    if "csv" in formats:
        _write_csv(out / "report.csv", ["Model", *rep.columns, "Error"], _table_rows(rep))
        written.append(out / "report.csv")
        kind = RegressionReport if rep.task == REGRESSION else ClassificationReport
        pairs = [(r.model, None if r.metrics is None else kind(*(r.metrics[c] for c in rep.columns))) for r in rep.rows]
        write_report_rows(out / "metrics.csv", pairs)
        written.append(out / "metrics.csv")
    if "json" in formats:
        doc = rep.to_dict()
        doc["importances"] = {m: v.as_dict() for m, v in result.importances.items()}
        doc["tuning"] = {
            m: {"method": s.method, "best_params": s.best_params, "best_mean": s.best.mean, "metric": s.metric, "candidates": len(s.candidates)}
            for m, s in result.searches.items()
        }
        if result.ols is not None:
            doc["ols"] = result.ols.to_dict()
        (out / "report.json").write_text(json.dumps(_json_safe(doc), sort_keys=True, indent=2) + "\n", encoding="utf-8")
        written.append(out / "report.json")
    if "md" in formats:
        (out / "report.md").write_text(report_markdown(result), encoding="utf-8")
        written.append(out / "report.md")
    for model, vec in result.importances.items():
        ranks = rank_vector(vec.values, vec.feature_names)
        rows = sorted(
            ([f, repr(float(v)), ranks[f]] for f, v in zip(vec.feature_names, vec.values)), key=lambda r: r[2]
        )
        path = out / f"importance_{slug(model)}.csv"
        _write_csv(path, ["feature", "importance", "rank"], rows)
        written.append(path)
    if result.importances:
        ranking = importance_ranking(result.importances)
        path = out / "importance_ranking.csv"
        _write_csv(path, ["feature", *ranking.models, "average_rank"], [r[:-1] + [repr(r[-1])] for r in ranking.rows()])
        written.append(path)
    for model, search in result.searches.items():
        path = out / f"tuning_{slug(model)}.csv"
        write_results_csv(search, path)
        written.append(path)
    if result.ols is not None:
        path = out / "coefficients.csv"
        write_coefficient_csv(result.ols.coefficient_rows(), path)
        written.append(path)
    (out / "timing.json").write_text(json.dumps(result.timing, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return written


def write_horizon_report(cmp: HorizonComparison, out_dir) -> list:
    out = Path(out_dir)
    written = write_reports(cmp.short, out / "2017") + write_reports(cmp.long, out / "2020")
    cols = cmp.short.report.columns
    rows = []
    for model, d in cmp.deltas.items():
        rows.append([model] + (["" for _ in cols] if d is None else [_fmt(d[c]) for c in cols]))
    _write_csv(out / "horizon_deltas.csv", ["Model", *[f"{c} (2017-2020)" for c in cols]], rows)
    (out / "horizon_deltas.md").write_text(_md_table(["Model", *[f"{c} delta" for c in cols]], rows) + "\n", encoding="utf-8")
    return written + [out / "horizon_deltas.csv", out / "horizon_deltas.md"]
