"""Exception hierarchy shared by every altcite module."""

from __future__ import annotations


class AltciteError(Exception):
    """Base class; ``code`` is the machine-readable name used by the CLI."""

    code = "altcite_error"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


# --- data ingestion -------------------------------------------------------


class DataError(AltciteError):
    code = "data_error"


class MissingColumn(DataError):
    code = "missing_column"

    def __init__(self, column: str):
        super().__init__(f"missing required column {column!r}")
        self.column = column

    def to_dict(self) -> dict:
        return {**super().to_dict(), "column": self.column}


class MissingValue(DataError):
    code = "missing_value"

    def __init__(self, row: int, column: str):
        super().__init__(f"row {row}: empty value in column {column!r}")
        self.row = row
        self.column = column

    def to_dict(self) -> dict:
        return {**super().to_dict(), "row": self.row, "column": self.column}


class InvalidValue(DataError):
    code = "invalid_value"

    def __init__(self, row: int, column: str, value):
        super().__init__(f"row {row}: column {column!r} is not a non-negative integer: {value!r}")
        self.row = row
        self.column = column
        self.value = value

    def to_dict(self) -> dict:
        return {**super().to_dict(), "row": self.row, "column": self.column}


class NegativeValue(DataError):
    code = "negative_value"

    def __init__(self, row: int, column: str, value):
        super().__init__(f"row {row}: column {column!r} is negative ({value})")
        self.row = row
        self.column = column
        self.value = value

    def to_dict(self) -> dict:
        return {**super().to_dict(), "row": self.row, "column": self.column}


class DuplicateDoi(DataError):
    code = "duplicate_doi"

    def __init__(self, doi: str, row: int):
        super().__init__(f"row {row}: duplicate doi {doi!r}")
        self.doi = doi
        self.row = row

    def to_dict(self) -> dict:
        return {**super().to_dict(), "doi": self.doi, "row": self.row}


class EmptyFile(DataError):
    code = "empty_file"


class NoOverlap(DataError):
    code = "no_overlap"


class TooFewRecords(DataError):
    code = "too_few_records"


# --- preprocessing --------------------------------------------------------


class TooFewRows(AltciteError):
    code = "too_few_rows"


class UnknownFeature(AltciteError):
    code = "unknown_feature"


class DegenerateSplit(AltciteError):
    code = "degenerate_split"


class BadK(AltciteError):
    code = "bad_k"


# --- metrics --------------------------------------------------------------


class LengthMismatch(AltciteError):
    code = "length_mismatch"


class EmptyMatrix(AltciteError):
    code = "empty_matrix"


# --- learners -------------------------------------------------------------


class EmptyData(AltciteError):
    code = "empty_data"


class SingleClass(AltciteError):
    code = "single_class"


class FeatureCountMismatch(AltciteError):
    code = "feature_count_mismatch"


class RankDeficient(AltciteError):
    code = "rank_deficient"

    def __init__(self, columns: list[str]):
        super().__init__(f"design matrix is rank deficient; dependent columns: {', '.join(columns)}")
        self.columns = list(columns)

    def to_dict(self) -> dict:
        return {**super().to_dict(), "columns": self.columns}


# --- tuning / experiments -------------------------------------------------


class EmptyGrid(AltciteError):
    code = "empty_grid"


class FoldError(AltciteError):
    """A learner error raised inside cross-validation, tagged with the fold."""

    code = "fold_error"

    def __init__(self, fold: int, cause: Exception):
        super().__init__(f"fold {fold}: {type(cause).__name__}: {cause}")
        self.fold = fold
        self.cause = cause


class StageError(AltciteError):
    """An experiment pipeline failure tagged with the stage that raised it."""

    code = "stage_error"

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class ConfigError(AltciteError):
    code = "config_error"
