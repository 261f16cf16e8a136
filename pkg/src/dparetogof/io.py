"""Reading count data and the log-log frequency diagnostic.

Two plain-text input formats are supported, UTF-8, whitespace-delimited,
with lines starting with ``#`` ignored:

``raw``
    one positive integer observation per line;
``pairs``
    lines ``value count`` with distinct values and counts >= 1.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distribution import FrequencyTable, as_table
from .exceptions import DomainError, InsufficientDataError, ParseError

__all__ = [
    "InputFormat",
    "ingest",
    "parse_text",
    "write_freq_pairs",
    "write_raw_counts",
    "LogLogDiagnostic",
    "loglog",
]


class InputFormat(str, Enum):
    RAW_COUNTS = "raw"
    FREQ_PAIRS = "pairs"


def _data_lines(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            yield lineno, stripped.split()


def _parse_int(token, lineno, what):
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} {token!r} is not an integer", lineno) from None


def _sniff(text):
    for _, fields in _data_lines(text):
        return InputFormat.FREQ_PAIRS if len(fields) == 2 else InputFormat.RAW_COUNTS
    return InputFormat.RAW_COUNTS


def parse_text(text, fmt=InputFormat.RAW_COUNTS):
    """Parse ``text`` in the given format (or ``"auto"``) into a table."""
    if fmt == "auto":
        fmt = _sniff(text)
    fmt = InputFormat(fmt)
    counts = {}
    if fmt is InputFormat.RAW_COUNTS:
        for lineno, fields in _data_lines(text):
            if len(fields) != 1:
                raise ParseError(f"expected one value per line, got {len(fields)}", lineno)
            value = _parse_int(fields[0], lineno, "value")
            if value < 1:
                raise DomainError(f"line {lineno}: values must be positive integers, got {value}")
            counts[value] = counts.get(value, 0) + 1
    else:
        for lineno, fields in _data_lines(text):
            if len(fields) != 2:
                raise ParseError(f"expected 'value count', got {len(fields)} field(s)", lineno)
            value = _parse_int(fields[0], lineno, "value")
            count = _parse_int(fields[1], lineno, "count")
            if value < 1:
                raise DomainError(f"line {lineno}: values must be positive integers, got {value}")
            if count < 1:
                raise DomainError(f"line {lineno}: counts must be at least 1, got {count}")
            if value in counts:
                raise ParseError(f"value {value} listed twice", lineno)
            counts[value] = count
    if not counts:
        raise ParseError("input contains no observations")
    return FrequencyTable.from_mapping(counts)


def ingest(path, fmt=InputFormat.RAW_COUNTS):
    """Read a count file; ``fmt`` is ``"raw"``, ``"pairs"`` or ``"auto"``."""
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), fmt)


def write_freq_pairs(data, stream=None):
    """Emit ``value count`` lines; returns a string when ``stream`` is None."""
    table = as_table(data)
    text = "".join(f"{v} {c}\n" for v, c in zip(table.values, table.counts))
    if stream is None:
        return text
    stream.write(text)
    return None


def write_raw_counts(values, stream=None):
    text = "".join(f"{int(v)}\n" for v in np.asarray(values).reshape(-1))
    if stream is None:
        return text
    stream.write(text)
    return None


@dataclass(frozen=True)
class LogLogDiagnostic:
    """Least-squares line through ``(log value, log frequency)``; natural logs."""

    values: np.ndarray
    frequencies: np.ndarray
    ols_slope: float
    ols_intercept: float
    r_squared: float

    @property
    def points(self):
        return list(zip(np.log(self.values).tolist(), np.log(self.frequencies).tolist()))

    def to_csv(self, stream=None):
        buf = stream if stream is not None else io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["value", "frequency", "log_value", "log_frequency"])
        for v, f in zip(self.values, self.frequencies):
            writer.writerow([int(v), int(f), repr(math.log(v)), repr(math.log(f))])
        return buf.getvalue() if stream is None else None

    def as_dict(self):
        return {
            "slope": self.ols_slope,
            "intercept": self.ols_intercept,
            "r_squared": self.r_squared,
            "points": [list(p) for p in self.points],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.as_dict(), **kwargs)


def loglog(data):
    """Ordinary least squares of log(frequency) on log(value).

    Every observed value enters once, unweighted.
    """
    table = as_table(data)
    if table.values.size < 2:
        raise InsufficientDataError("the log-log fit needs at least two distinct values")
    x = np.log(table.values.astype(float))
    y = np.log(table.counts.astype(float))
    xc = x - x.mean()
    yc = y - y.mean()
    slope = float(xc @ yc / (xc @ xc))
    intercept = float(y.mean() - slope * x.mean())
    ss_res = float(np.sum((yc - slope * xc) ** 2))
    ss_tot = float(yc @ yc)
    r2 = 1.0 if ss_tot == 0.0 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return LogLogDiagnostic(table.values.copy(), table.counts.copy(), slope, intercept, r2)
