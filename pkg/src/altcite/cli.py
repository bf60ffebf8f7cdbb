"""Command-line interface: ``altcite <subcommand> [options]``.

Exit codes: 0 success, 1 data or pipeline error (reported on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .data import (
    GeneratorProfile,
    describe,
    discipline_counts,
    fit_profile,
    generate,
    join_citations,
    load_citation_table,
    load_dataset,
    paper_profile,
    save_dataset,
)
from .errors import AltciteError, ConfigError
from .experiments import (
    DEFAULT_SEEDS,
    ExperimentConfig,
    TuningConfig,
    compare_horizons,
    default_models,
    run_experiment,
    write_horizon_report,
    write_reports,
)
from .linear import check_paper_consistency, display_term, paper_model_predict
from .preprocess import (
    feature_matrix,
    label_above_median,
    label_nonzero,
    log1p_features,
    numeric_matrix,
    prune_collinear,
    target_log1p,
)
from .tuning import FAMILIES, HyperparamSpace, default_space, grid_search, random_search, write_results_csv
from . import schema

log = logging.getLogger("altcite")

EXP_NAMES = {"1": "exp1_nonzero", "2": "exp2_median", "3": "exp3_regression"}


def _common(suppress: bool) -> argparse.ArgumentParser:
    """Flags accepted both before and after the subcommand."""
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed-split", type=int, default=d(None), help="seed for the train/test permutation (default %d)" % DEFAULT_SEEDS["split"])
    g.add_argument("--seed-tune", type=int, default=d(None), help="seed for search draws and CV folds (default %d)" % DEFAULT_SEEDS["tune"])
    g.add_argument("--seed-model", type=int, default=d(None), help="seed for model randomness and synthesis (default %d)" % DEFAULT_SEEDS["model"])
    g.add_argument("--format", choices=("csv", "json", "md"), default=d("csv"), help="output format for tabular results (default csv)")
    g.add_argument("--out", default=d(None), help="output directory (default: stdout where applicable, else ./out)")
    g.add_argument("--error-format", choices=("text", "json"), default=d("text"), help="how errors are written to stderr")
    g.add_argument("-v", "--verbose", action="count", default=d(0), help="more logging on stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="altcite", description="Altmetric citation prediction toolkit.", parents=[_common(False)], allow_abbrev=False
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = _common(True)

    p = sub.add_parser("ingest", parents=[common], allow_abbrev=False, help="validate a dataset and write it in canonical form")
    p.add_argument("input", help="altmetrics CSV or JSON file")
    p.add_argument("--citations", help="doi,year,count CSV to join")
    p.add_argument("--year", type=int, choices=schema.CITATION_YEARS, help="only join citation rows for this year")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", parents=[common], allow_abbrev=False, help="descriptive statistics of the numeric features")
    p.add_argument("input")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", parents=[common], allow_abbrev=False, help="generate a synthetic dataset")
    p.add_argument("--n", type=int, required=True, help="number of records")
    p.add_argument("--seed", type=int, help="generator seed (default: --seed-model)")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--profile", help="generator profile JSON (default: the built-in calibrated profile)")
    src.add_argument("--fit", help="fit the profile to this dataset first")
    p.add_argument("--save-profile", help="also write the profile used to this path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tune", parents=[common], allow_abbrev=False, help="cross-validated hyperparameter search for one model")
    p.add_argument("input")
    p.add_argument("--exp", choices=sorted(EXP_NAMES), required=True)
    p.add_argument("--year", type=int, choices=schema.CITATION_YEARS, default=2017)
    p.add_argument("--model", choices=sorted(FAMILIES), required=True)
    p.add_argument("--method", choices=("random", "grid"), default="random")
    p.add_argument("--n-iter", type=int, default=10)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--metric", help="f1, accuracy, precision, recall, r2, neg_mse or neg_mae")
    p.add_argument("--space", help="search space JSON (parameter -> domain)")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("experiment", parents=[common], allow_abbrev=False, help="run an experiment and write its reports")
    p.add_argument("input")
    p.add_argument("--exp", choices=sorted(EXP_NAMES), help="1 nonzero, 2 above median, 3 regression")
    p.add_argument("--year", type=int, choices=schema.CITATION_YEARS)
    p.add_argument("--config", help="ExperimentConfig JSON; --exp/--year/seed flags override it")
    p.add_argument("--strict-median", action="store_true", help="compute the median label threshold on the training split")
    p.add_argument("--no-tune", action="store_true", help="fit every model with default parameters")
    p.add_argument("--n-iter", type=int, help="random-search draws per tuned model (default 10)")
    p.add_argument("--k", type=int, help="cross-validation folds for tuning (default 10)")
    p.add_argument("--compare-horizons", action="store_true", help="run both citation years and tabulate the deltas")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("score", parents=[common], allow_abbrev=False, help="score records with the embedded published regression")
    p.add_argument("input")
    p.add_argument("--year", type=int, choices=schema.CITATION_YEARS, default=2017)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("check-paper", parents=[common], allow_abbrev=False, help="check the embedded coefficient tables for internal consistency")
    p.set_defaults(func=cmd_check_paper)
    return parser


# --- output helpers -------------------------------------------------------


def _render(header, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    if fmt == "md":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, name: str, text: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.{args.format}").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _seeds(args, fallback=None) -> dict:
    """Seed flags given on the command line win, then ``fallback``, then the defaults."""
    fallback = {**DEFAULT_SEEDS, **(fallback or {})}
    given = {"split": args.seed_split, "tune": args.seed_tune, "model": args.seed_model}
    return {k: fallback[k] if v is None else v for k, v in given.items()}


# --- subcommands ----------------------------------------------------------


def cmd_ingest(args) -> int:
    ds = load_dataset(args.input)
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    if args.citations:
        rows = load_citation_table(args.citations)
        if args.year is not None:
            rows = [r for r in rows if r[1] == args.year]
        ds, report = join_citations(ds, rows)
        (out / "join_report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        log.info("joined: %d kept, %d dropped, %d unmatched citation rows", len(ds), len(report.dropped_records), len(report.unmatched_citation_rows))
    fmt = "json" if args.format == "json" else "csv"
    save_dataset(ds, out / f"normalized.{fmt}", fmt)
    log.info("wrote %d records to %s", len(ds), out / f"normalized.{fmt}")
    return 0


def cmd_stats(args) -> int:
    ds = load_dataset(args.input)
    stats = describe(ds)
    if args.format == "json":
        doc = stats.to_dict()
        doc["disciplines"] = discipline_counts(ds)
        _emit(args, "stats", json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return 0
    header = ["feature", *stats.COLUMNS]
    rows = [[name, *(f"{v:.2f}" for v in fs.as_row())] for name, fs in stats.features.items()]
    _emit(args, "stats", _render(header, rows, args.format))
    return 0


def cmd_synth(args) -> int:
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    if args.profile:
        profile = GeneratorProfile.from_dict(json.loads(Path(args.profile).read_text(encoding="utf-8")))
    elif args.fit:
        profile = fit_profile(load_dataset(args.fit))
    else:
        profile = paper_profile()
    seed = args.seed if args.seed is not None else _seeds(args)["model"]
    ds = generate(profile, args.n, seed)
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    fmt = "json" if args.format == "json" else "csv"
    save_dataset(ds, out / f"synthetic.{fmt}", fmt)
    if args.save_profile:
        Path(args.save_profile).write_text(json.dumps(profile.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def _tuning_data(ds, exp: str, year: int):
    """Full-data design for stand-alone tuning (prune, encode, label)."""
    column = schema.CITATION_COLUMNS[year]
    citations = ds.column(column)
    _, dropped = prune_collinear(numeric_matrix(ds))
    m, _ = feature_matrix(ds, drop=dropped)
    if exp == "exp3_regression":
        m = log1p_features(m, [f for f in schema.LOG_FEATURES if f in m.feature_names])
        return m, target_log1p(citations).values, "regression"
    if exp == "exp1_nonzero":
        return m, label_nonzero(citations).values, "classification"
    return m, label_above_median(citations)[0].values, "classification"


def cmd_tune(args) -> int:
    ds = load_dataset(args.input)
    exp = EXP_NAMES[args.exp]
    m, y, task = _tuning_data(ds, exp, args.year)
    metric = args.metric or ("f1" if task == "classification" else "neg_mse")
    seeds = _seeds(args)
    if args.space:
        space = HyperparamSpace(json.loads(Path(args.space).read_text(encoding="utf-8")))
    else:
        space = default_space(args.model, task, args.method, m.shape[1])
    if args.method == "grid":
        search = grid_search(args.model, task, space, m.values, y, args.k, seeds["tune"], metric, model_seed=seeds["model"])
    else:
        search = random_search(args.model, task, space, m.values, y, args.n_iter, args.k, seeds["tune"], metric, model_seed=seeds["model"])
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    write_results_csv(search, out / "tuning_results.csv")
    sys.stdout.write(json.dumps({"best_params": search.best_params, "best_mean": search.best.mean, "metric": metric}, sort_keys=True) + "\n")
    return 0


def cmd_experiment(args) -> int:
    base = {}
    if args.config:
        base = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.exp:
        base["experiment"] = EXP_NAMES[args.exp]
    if args.year:
        base["year"] = args.year
    if "experiment" not in base:
        raise ConfigError("give --exp or a --config with an experiment")
    base["seeds"] = _seeds(args, base.get("seeds"))
    if args.strict_median:
        base["median_scope"] = "train"
    if not base.get("models"):
        tuning = None if args.no_tune else TuningConfig(n_iter=args.n_iter or 10, k=args.k or 10)
        base["models"] = [asdict(m) for m in default_models(base["experiment"], tuning)]
    elif args.no_tune:
        for m in base["models"]:
            m["tuning"] = None
    config = ExperimentConfig.from_dict(base)
    ds = load_dataset(args.input)
    out = Path(args.out or "out")
    if args.compare_horizons:
        written = write_horizon_report(compare_horizons(ds, config), out)
    else:
        result = run_experiment(ds, config)
        written = write_reports(result, out)
        if "median" in result.report.notes:
            log.info("median used for labels: %g", result.report.notes["median"])
    for path in written:
        log.info("wrote %s", path)
    return 0


def cmd_score(args) -> int:
    ds = load_dataset(args.input)
    header = ["doi", "log_prediction", "count_estimate", "approximate"]
    rows = []
    for rec in ds.records:
        p = paper_model_predict(rec, args.year)
        rows.append([rec.doi, f"{p.log_prediction:.4f}", f"{p.count_estimate:.3f}", str(p.approximate).lower()])
    _emit(args, "scores", _render(header, rows, args.format))
    return 0


def cmd_check_paper(args) -> int:
    results = check_paper_consistency()
    header = ["year", "term", "status", "ratio_low", "ratio_high", "reason"]
    rows = [
        [r.year, display_term(r.term), r.status, "" if r.ratio_low is None else f"{r.ratio_low:.4f}", "" if r.ratio_high is None else f"{r.ratio_high:.4f}", r.reason]
        for r in results
    ]
    _emit(args, "paper_check", _render(header, rows, args.format))
    return 1 if any(r.status == "FAIL" for r in results) else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)
    try:
        return args.func(args)
    except AltciteError as exc:
        if args.error_format == "json":
            sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        else:
            sys.stderr.write(f"error: {exc}\n")
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        payload = {"code": "io_error", "message": str(exc)}
        sys.stderr.write((json.dumps(payload) if args.error_format == "json" else f"error: {exc}") + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
