"""CSV ingestion and the bundled mine-fracture dataset."""

from __future__ import annotations

import csv
from importlib import resources

import numpy as np

from .model import Dataset


def load_dataset(path, response_column: str = "y", covariate_columns=None,
                 add_intercept: bool = True, standardize: bool = False) -> Dataset:
    """Read a headered CSV into a Dataset.

    The response column must hold nonnegative integers; covariates default to
    every other column in file order. With add_intercept (default) a leading
    all-ones column is prepended. standardize centers and scales covariate
    columns (never the intercept). Errors name the offending row and column.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: no rows") from None
        header = [h.strip() for h in header]
        if response_column not in header:
            raise ValueError(f"{path}: missing response column '{response_column}'")
        if covariate_columns is None:
            covariate_columns = [h for h in header if h != response_column]
        for col in covariate_columns:
            if col not in header:
                raise ValueError(f"{path}: missing covariate column '{col}'")
        y_idx = header.index(response_column)
        x_idx = [header.index(c) for c in covariate_columns]

        ys, rows = [], []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                y_val = float(row[y_idx])
            except (ValueError, IndexError):
                raise ValueError(
                    f"{path}: row {row_no}, column '{response_column}': "
                    f"unreadable response"
                ) from None
            if y_val < 0 or y_val != int(y_val):
                raise ValueError(
                    f"{path}: row {row_no}, column '{response_column}': "
                    f"{row[y_idx]} is not a nonnegative integer"
                )
            xs = []
            for c, j in zip(covariate_columns, x_idx):
                try:
                    v = float(row[j])
                except (ValueError, IndexError):
                    raise ValueError(
                        f"{path}: row {row_no}, column '{c}': unreadable value"
                    ) from None
                if not np.isfinite(v):
                    raise ValueError(
                        f"{path}: row {row_no}, column '{c}': non-finite value"
                    )
                xs.append(v)
            ys.append(int(y_val))
            rows.append(xs)

    if not rows:
        raise ValueError(f"{path}: no rows")
    X = np.asarray(rows, dtype=float)
    if standardize:
        sd = X.std(axis=0, ddof=1)
        if np.any(sd == 0):
            bad = covariate_columns[int(np.flatnonzero(sd == 0)[0])]
            raise ValueError(f"{path}: column '{bad}' is constant; cannot standardize")
        X = (X - X.mean(axis=0)) / sd
    if add_intercept:
        X = np.column_stack([np.ones(len(rows)), X])
    return Dataset(y=np.asarray(ys), X=X)


def mines_path():
    """Filesystem path of the bundled mine-fracture CSV."""
    return resources.files("bellreg").joinpath("data/mines.csv")


def load_mines(add_intercept: bool = True, standardize: bool = False) -> Dataset:
    """The bundled 44-observation mine-fracture dataset.

    Response: number of fractures in the upper seam. Covariates: inner-burden
    thickness (x1, ft), percent extraction of the lower seam (x2), lower seam
    height (x3), and years the mine has been open (x4). See data/README.md
    for provenance; the file is a calibrated reconstruction of the dataset
    analyzed by Myers (1990), not a verbatim transcription.
    """
    with resources.as_file(mines_path()) as path:
        return load_dataset(path, add_intercept=add_intercept, standardize=standardize)
