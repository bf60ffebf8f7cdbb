import csv
from dataclasses import replace

import numpy as np
import pytest

from altcite import schema
from altcite.data import ArticleRecord, Dataset, generate, paper_profile

ACCEPTANCE_LINES: list = []


def make_record(doi="10.1/a", **overrides) -> ArticleRecord:
    values = {name: 0 for name in schema.NUMERIC}
    values.update({name: "0" for name in schema.CATEGORICAL})
    values.update(overrides)
    return ArticleRecord(doi=doi, **values)


def make_dataset(n, seed=0, **columns) -> Dataset:
    """Records with random small counts; ``columns`` override whole columns."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        values = {name: int(rng.integers(0, 20)) for name in schema.NUMERIC}
        values.update({name: str(rng.choice(["a", "b", "c"])) for name in schema.CATEGORICAL})
        values["citations_2017"] = int(rng.integers(0, 30))
        values["citations_2020"] = int(rng.integers(0, 60))
        for name, col in columns.items():
            values[name] = col[i]
        records.append(make_record(doi=f"10.1/{i}", **values))
    return Dataset(tuple(records))


def write_rows_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def record_row(rec: ArticleRecord, columns):
    return [getattr(rec, c) for c in columns]


@pytest.fixture(scope="session")
def reference_data() -> Dataset:
    """Full-size draw from the calibrated default profile."""
    return generate(paper_profile(), 12374, seed=7)


@pytest.fixture
def small_data() -> Dataset:
    return make_dataset(60, seed=3)


def with_citations(ds: Dataset, c2017=None, c2020=None) -> Dataset:
    recs = []
    for i, r in enumerate(ds.records):
        upd = {}
        if c2017 is not None:
            upd["citations_2017"] = int(c2017[i])
        if c2020 is not None:
            upd["citations_2020"] = int(c2020[i])
        recs.append(replace(r, **upd))
    return Dataset(tuple(recs))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
