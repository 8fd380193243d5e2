"""CSV ingestion, validation, normalization, and score persistence.

File convention: comma-separated, UTF-8, ``\\n`` newlines, one header row
followed by numeric rows. A column named exactly ``Label`` (case sensitive)
carries ground truth and is split off into ``TimeSeries.labels``; every other
column becomes a data channel, in file order. Missing or non-finite values
are rejected, never imputed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InsufficientDataError,
    LabelError,
    SeriesFormatError,
    SeriesParseError,
)

LABEL_COLUMN = "Label"

# Channels whose population std falls below this are centered but not scaled.
ZERO_VARIANCE_THRESHOLD = 1e-12


@dataclass
class TimeSeries:
    """An n x d real-valued series: rows are timestamps, columns are channels.

    Attributes:
        values:        (n, d) float64 array, all entries finite.
        channel_names: d channel names, in column order.
        labels:        optional (n,) vector of 0/1 anomaly marks.
    """

    values: np.ndarray
    channel_names: list[str]
    labels: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise SeriesFormatError(
                f"series values must be a non-empty 2-D array, got shape {np.shape(self.values)}"
            )
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise SeriesFormatError(
                f"series contains a non-finite value at row {bad[0]}, channel {bad[1]}"
            )
        self.values = values
        self.channel_names = [str(c) for c in self.channel_names]
        if len(self.channel_names) != values.shape[1]:
            raise SeriesFormatError(
                f"{len(self.channel_names)} channel names for {values.shape[1]} channels"
            )
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (values.shape[0],):
                raise LabelError(
                    f"labels have shape {labels.shape}, expected ({values.shape[0]},)"
                )
            if not np.all((labels == 0) | (labels == 1)):
                raise LabelError("labels must contain only 0 or 1")
            self.labels = labels.astype(np.int64)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def _parse_cell(cell: str, lineno: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise SeriesParseError(
            f"line {lineno}, column {column!r}: cannot parse {cell!r} as a number"
        ) from None
    if not np.isfinite(value):
        raise SeriesParseError(
            f"line {lineno}, column {column!r}: non-finite value {cell!r}"
        )
    return value


def read_csv(path: str | Path) -> TimeSeries:
    """Load a time series from ``path``.

    The header is mandatory; a first row that parses entirely as numbers is
    treated as a missing header. A ``Label`` column, when present, becomes
    ``labels`` and is removed from the data channels.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SeriesFormatError(f"{path}: file is empty") from None
        header = [name.strip() for name in header]
        if all(_is_number(cell) for cell in header):
            raise SeriesFormatError(f"{path}: missing header row")
        if header.count(LABEL_COLUMN) > 1:
            raise SeriesFormatError(f"{path}: duplicate {LABEL_COLUMN!r} column")
        label_pos = header.index(LABEL_COLUMN) if LABEL_COLUMN in header else None
        channel_names = [h for i, h in enumerate(header) if i != label_pos]
        if not channel_names:
            raise SeriesFormatError(f"{path}: no data columns besides {LABEL_COLUMN!r}")

        rows: list[list[float]] = []
        labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SeriesParseError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            data_row = []
            for pos, cell in enumerate(row):
                if pos == label_pos:
                    value = _parse_cell(cell, lineno, LABEL_COLUMN)
                    if value not in (0.0, 1.0):
                        raise LabelError(
                            f"{path}: line {lineno}: {LABEL_COLUMN} must be 0 or 1, got {cell!r}"
                        )
                    labels.append(int(value))
                else:
                    data_row.append(_parse_cell(cell, lineno, header[pos]))
            rows.append(data_row)

    if not rows:
        raise SeriesFormatError(f"{path}: no data rows")
    return TimeSeries(
        np.asarray(rows, dtype=np.float64),
        channel_names,
        np.asarray(labels, dtype=np.int64) if label_pos is not None else None,
    )


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def write_csv(ts: TimeSeries, path: str | Path) -> None:
    """Write ``ts`` in the standard format; floats use shortest exact repr."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        header = list(ts.channel_names)
        if ts.labels is not None:
            header.append(LABEL_COLUMN)
        fh.write(",".join(header) + "\n")
        for i in range(ts.n):
            cells = [repr(float(v)) for v in ts.values[i]]
            if ts.labels is not None:
                cells.append(str(int(ts.labels[i])))
            fh.write(",".join(cells) + "\n")


def zscore_normalize(ts: TimeSeries) -> TimeSeries:
    """Shift every channel to mean 0 and scale it to population std 1.

    Channels with std below ``ZERO_VARIANCE_THRESHOLD`` are centered only.
    Labels are carried through untouched.
    """
    if ts.n < 2:
        raise InsufficientDataError(f"z-score normalization needs n >= 2, got n={ts.n}")
    mean = ts.values.mean(axis=0)
    std = ts.values.std(axis=0)
    scale = np.where(std < ZERO_VARIANCE_THRESHOLD, 1.0, std)
    return TimeSeries(
        (ts.values - mean) / scale,
        list(ts.channel_names),
        None if ts.labels is None else ts.labels.copy(),
    )


def write_scores(scores: np.ndarray, path: str | Path) -> None:
    """Persist a score vector: header ``score``, one value per line.

    Values are emitted with 17 significant digits so a read round-trips
    bit-for-bit.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("score\n")
        for value in scores:
            fh.write(format(float(value), ".17g") + "\n")


def read_scores(path: str | Path) -> np.ndarray:
    """Read a score vector written by :func:`write_scores`."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline()
        if header == "":
            raise SeriesFormatError(f"{path}: file is empty")
        if header.strip() != "score":
            raise SeriesFormatError(f"{path}: expected header 'score', got {header.strip()!r}")
        values = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise SeriesParseError(
                    f"{path}: line {lineno}: cannot parse {line!r} as a score"
                ) from None
    return np.asarray(values, dtype=np.float64)
