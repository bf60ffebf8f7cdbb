"""Correlation and quantile helpers shared by the data and preprocess modules."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

QUANTILE_METHOD = "linear"


def quantile(values, q):
    """Quantile with linear interpolation between closest ranks."""
    return np.quantile(np.asarray(values, dtype=float), q, method=QUANTILE_METHOD)


def pearson_array(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pearson correlation of the columns of ``values``.

    Returns ``(r, constant)``. Zero-variance columns get correlation 0 with
    everything, including themselves, and are flagged in ``constant``.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected a 2-D array")
    centered = x - x.mean(axis=0)
    ss = np.einsum("ij,ij->j", centered, centered)
    constant = ss <= 0.0
    scale = np.sqrt(np.where(constant, 1.0, ss))
    z = centered / scale
    r = z.T @ z
    r[constant, :] = 0.0
    r[:, constant] = 0.0
    diag = np.where(constant, 0.0, 1.0)
    np.fill_diagonal(r, diag)
    r = np.clip((r + r.T) / 2.0, -1.0, 1.0)
    return r, constant


def spearman_array(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spearman rank correlation (average ranks for ties) with the same flags."""
    x = np.asarray(values, dtype=float)
    ranks = np.column_stack([rankdata(x[:, j]) for j in range(x.shape[1])]) if x.shape[1] else x
    return pearson_array(ranks)
