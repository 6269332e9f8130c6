"""Multivariate time-series container and CSV round-tripping.

All estimation routines in this package operate on a ``TimeSeriesMatrix``:
rows are time points, columns are variables.  Plain ``ndarray`` input is
accepted everywhere and wrapped with synthetic column names.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataFormatError, DegenerateInputError

__all__ = ["TimeSeriesMatrix", "as_timeseries", "read_csv", "write_csv"]


@dataclass(frozen=True)
class TimeSeriesMatrix:
    """A ``T x n`` block of observations with column names.

    Parameters
    ----------
    values : ndarray
        Two-dimensional float array, one row per time point.
    names : sequence of str
        One name per column.
    dates : sequence of str, optional
        Row labels carried through from input files.  Purely cosmetic;
        no arithmetic is ever performed on them.
    """

    values: np.ndarray
    names: tuple[str, ...]
    dates: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DegenerateInputError(
                f"expected a 2-D array of observations, got ndim={values.ndim}"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(str(c) for c in self.names))
        if len(self.names) != values.shape[1]:
            raise DegenerateInputError(
                f"{len(self.names)} column names for {values.shape[1]} columns"
            )
        if self.dates is not None:
            object.__setattr__(self, "dates", tuple(str(d) for d in self.dates))
            if len(self.dates) != values.shape[0]:
                raise DegenerateInputError(
                    f"{len(self.dates)} date labels for {values.shape[0]} rows"
                )

    @property
    def nobs(self) -> int:
        return self.values.shape[0]

    @property
    def nvar(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.names.index(name)
        except ValueError:
            raise KeyError(f"no column named {name!r}; have {list(self.names)}") from None
        return self.values[:, j]

    def with_values(self, values: np.ndarray, names: Sequence[str] | None = None,
                    keep_dates: bool = False) -> "TimeSeriesMatrix":
        """Return a copy holding ``values``, reusing names where shapes allow."""
        values = np.asarray(values, dtype=float)
        if names is None:
            names = self.names if values.shape[1] == self.nvar else tuple(
                f"v{j + 1}" for j in range(values.shape[1]))
        dates = self.dates if keep_dates and self.dates is not None \
            and values.shape[0] == self.nobs else None
        return TimeSeriesMatrix(values, tuple(names), dates)

    def tail(self, rows: int) -> "TimeSeriesMatrix":
        out = replace(self, values=self.values[-rows:],
                      dates=self.dates[-rows:] if self.dates is not None else None)
        return out


def as_timeseries(data, names: Sequence[str] | None = None) -> TimeSeriesMatrix:
    """Coerce an array or ``TimeSeriesMatrix`` to a ``TimeSeriesMatrix``."""
    if isinstance(data, TimeSeriesMatrix):
        return data
    values = np.asarray(data, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if names is None:
        names = tuple(f"v{j + 1}" for j in range(values.shape[1]))
    return TimeSeriesMatrix(values, tuple(names))


def _parse_cell(text: str, line: int, name: str) -> float:
    stripped = text.strip()
    if not stripped:
        raise DataFormatError(f"line {line}: empty cell in column {name!r}")
    try:
        return float(stripped)
    except ValueError:
        raise DataFormatError(
            f"line {line}: cannot parse {text!r} in column {name!r} as a number"
        ) from None


def read_csv(path: str | Path) -> TimeSeriesMatrix:
    """Read a CSV file with a header row into a :class:`TimeSeriesMatrix`.

    The first column is treated as date labels when its first data value does
    not parse as a number; date labels are carried through unparsed.  Every
    remaining cell must be numeric and non-empty, otherwise a
    :class:`DataFormatError` pinpoints the offending line and column.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: file is empty") from None
        if not header or all(not h.strip() for h in header):
            raise DataFormatError(f"{path}: header row is blank")
        rows = list(reader)

    if not rows:
        raise DataFormatError(f"{path}: no data rows below the header")

    first = rows[0]
    has_dates = False
    if len(first) > 1:
        try:
            float(first[0].strip() or "x")
        except ValueError:
            has_dates = True

    names = tuple(h.strip() for h in (header[1:] if has_dates else header))
    dates: list[str] = []
    data = np.empty((len(rows), len(names)), dtype=float)
    for i, row in enumerate(rows):
        line = i + 2  # header occupies line 1
        if len(row) != len(header):
            raise DataFormatError(
                f"line {line}: expected {len(header)} fields, found {len(row)}"
            )
        if has_dates:
            dates.append(row[0].strip())
            row = row[1:]
        for j, cell in enumerate(row):
            data[i, j] = _parse_cell(cell, line, names[j])

    return TimeSeriesMatrix(data, names, tuple(dates) if has_dates else None)


def write_csv(series: TimeSeriesMatrix, path: str | Path) -> None:
    """Write a :class:`TimeSeriesMatrix` to CSV (inverse of :func:`read_csv`)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if series.dates is not None:
            writer.writerow(("date",) + series.names)
            for label, row in zip(series.dates, series.values):
                writer.writerow([label] + [repr(float(v)) for v in row])
        else:
            writer.writerow(series.names)
            for row in series.values:
                writer.writerow([repr(float(v)) for v in row])
