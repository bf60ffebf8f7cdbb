"""Ordinary least squares with inference statistics, and the published
log-citation regression embedded as a scorer."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache
from importlib import resources
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from . import schema
from .errors import FeatureCountMismatch, RankDeficient, TooFewRows
from .trees import _as_matrix, _as_target

RANK_TOL = 1e-10


@dataclass(frozen=True)
class OLSModel:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_values: np.ndarray
    sigma2: float
    n: int
    p: int
    feature_names: tuple
    r2: float

    def coefficient_rows(self) -> list[tuple[str, float, float, float]]:
        return [
            (name, float(b), float(s), float(t))
            for name, b, s, t in zip(self.feature_names, self.coefficients, self.standard_errors, self.t_values)
        ]

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "coefficients": self.coefficients.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "t_values": [None if not np.isfinite(t) else float(t) for t in self.t_values],
            "sigma2": self.sigma2,
            "n": self.n,
            "p": self.p,
            "r2": self.r2,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OLSModel":
        return cls(
            np.asarray(d["coefficients"], dtype=float),
            np.asarray(d["standard_errors"], dtype=float),
            np.asarray([np.nan if t is None else t for t in d["t_values"]], dtype=float),
            float(d["sigma2"]),
            int(d["n"]),
            int(d["p"]),
            tuple(d["feature_names"]),
            float(d["r2"]),
        )


def fit_ols(X, y) -> OLSModel:
    """Least squares through a QR factorization of the design.

    ``X`` must already contain any intercept column. The diagonal of
    ``(X'X)^-1`` comes from ``R^-1`` so no normal-equation matrix is formed.
    """
    arr, names = _as_matrix(X)
    target = np.asarray(_as_target(y), dtype=float)
    n, p = arr.shape
    if len(target) != n:
        raise ValueError("X and y lengths differ")
    if n <= p:
        raise TooFewRows(f"OLS needs more rows than columns (n={n}, p={p})")
    Q, R = np.linalg.qr(arr, mode="reduced")
    diag = np.abs(np.diag(R))
    scale = max(float(diag.max()), 1.0) if diag.size else 1.0
    dependent = [names[j] for j in np.flatnonzero(diag <= RANK_TOL * scale)]
    if dependent:
        raise RankDeficient(dependent)
    beta = solve_triangular(R, Q.T @ target)
    resid = target - arr @ beta
    ss_res = float(resid @ resid)
    sigma2 = ss_res / (n - p)
    r_inv = solve_triangular(R, np.eye(p))
    xtx_inv_diag = np.sum(r_inv * r_inv, axis=1)
    se = np.sqrt(sigma2 * xtx_inv_diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = beta / se
    ss_tot = float(np.sum((target - target.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return OLSModel(beta, se, t, sigma2, n, p, names, r2)


def predict_ols(model: OLSModel, X) -> np.ndarray:
    arr, _ = _as_matrix(X)
    if arr.shape[1] != model.p:
        raise FeatureCountMismatch(f"model expects {model.p} columns, got {arr.shape[1]}")
    return arr @ model.coefficients


def display_term(name: str) -> str:
    return "Constant" if name == "const" else schema.DISPLAY_NAMES.get(name, name)


def write_coefficient_csv(rows, path) -> None:
    """CSV ``term,coefficient,std_error,t_value`` with table-style rounding."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["term", "coefficient", "std_error", "t_value"])
        for name, b, s, t in rows:
            w.writerow([display_term(name), f"{b:.4f}", f"{s:.3f}", f"{t:.3f}" if np.isfinite(t) else "nan"])


# --- embedded published model ---------------------------------------------


@dataclass(frozen=True)
class PublishedRow:
    term: str
    coefficient: str
    std_error: str
    t_value: str

    @property
    def values(self) -> tuple[float, float, float]:
        return float(self.coefficient), float(self.std_error), float(self.t_value)


@lru_cache(maxsize=1)
def _load_coefficients() -> dict:
    text = resources.files("altcite").joinpath("resources/paper_coefficients.json").read_text(encoding="utf-8")
    return json.loads(text)


def paper_coefficients(year: int) -> list[PublishedRow]:
    models = _load_coefficients()["models"]
    if str(year) not in models:
        raise ValueError(f"no published model for year {year}")
    return [PublishedRow(**row) for row in models[str(year)]]


PUBLISHED_PREDICTORS = tuple(f for f in schema.FEATURES if f != "retweets")


@dataclass(frozen=True)
class PublishedPrediction:
    log_prediction: float
    count_estimate: float
    approximate: bool
    year: int

    def as_dict(self) -> dict:
        return {
            "log_prediction": self.log_prediction,
            "count_estimate": self.count_estimate,
            "approximate": self.approximate,
            "year": self.year,
        }


def _category_code(value) -> tuple[int, bool]:
    """Integer-like values are taken as codes; anything else maps to 0 (unknown)."""
    try:
        code = int(str(value).strip())
    except ValueError:
        return 0, False
    return code, True


def paper_model_predict(record, year: int = 2017) -> PublishedPrediction:
    """Predicted ln(1 + citations) from the published coefficients.

    The listed count features enter as ln(1+x); Total Platforms, Post Length
    and the three categorical codes enter raw. Categorical codes are
    approximations since the original codebook is unavailable, so any
    nonzero or unparseable category sets ``approximate``.
    """
    rows = {r.term: float(r.coefficient) for r in paper_coefficients(year)}
    total = rows["const"]
    approximate = False
    for name in PUBLISHED_PREDICTORS:
        raw = getattr(record, name)
        if name in schema.CATEGORICAL:
            value, known = _category_code(raw)
            approximate = approximate or not known or value != 0
        elif name in schema.LOG_FEATURES:
            value = math.log1p(raw)
        else:
            value = float(raw)
        total += rows[name] * value
    return PublishedPrediction(total, max(math.expm1(total), 0.0), approximate, int(year))


# --- internal consistency of the printed tables ---------------------------


def _interval(text: str) -> tuple[float, float]:
    """Values that round to ``text`` at its printed number of decimals."""
    half = 0.5 * 10.0 ** Decimal(text).as_tuple().exponent
    v = float(text)
    return v - half, v + half


@dataclass(frozen=True)
class ConsistencyRow:
    year: int
    term: str
    status: str  # PASS, FAIL or SKIPPED
    ratio_low: Optional[float]
    ratio_high: Optional[float]
    reason: str = ""


def check_paper_consistency(years=(2017, 2020)) -> list[ConsistencyRow]:
    """Check coefficient / standard error against the printed t-value.

    A row passes when some coefficient and standard error inside their
    half-unit rounding intervals give a ratio inside the t-value's interval.
    Rows whose standard error prints as zero are skipped.
    """
    out = []
    for year in years:
        for row in paper_coefficients(year):
            c_lo, c_hi = _interval(row.coefficient)
            s_lo, s_hi = _interval(row.std_error)
            t_lo, t_hi = _interval(row.t_value)
            if float(row.std_error) == 0.0:
                out.append(ConsistencyRow(year, row.term, "SKIPPED", None, None, "standard error printed as zero"))
                continue
            corners = [c / s for c in (c_lo, c_hi) for s in (s_lo, s_hi)]
            lo, hi = min(corners), max(corners)
            ok = lo <= t_hi and hi >= t_lo
            out.append(ConsistencyRow(year, row.term, "PASS" if ok else "FAIL", lo, hi, "" if ok else "ratio range misses the printed t"))
    return out
