"""CSV matrix ingestion and benchmark result persistence.

Matrices are stored row-major as plain decimal text without a header.
Values are written with enough significant digits to round-trip the
storage format exactly (17 for double, 9 for single, 5 for half).
"""

from __future__ import annotations

import contextlib
import csv
import json
import math
import os
from dataclasses import asdict, dataclass, fields
from typing import Iterable, List, Optional

import numpy as np

from .array import MPArray, from_numpy
from .errors import MpnumError
from .precision import Precision, parse_precision

__all__ = [
    "ParseError",
    "RaggedRows",
    "BenchRecord",
    "read_matrix_csv",
    "write_matrix_csv",
    "write_results",
    "read_results",
    "RESULT_FIELDS",
]

_DIGITS = {Precision.DOUBLE: 17, Precision.SINGLE: 9, Precision.HALF: 5}
_SPECIAL = {"inf": math.inf, "+inf": math.inf, "-inf": -math.inf, "nan": math.nan}


class ParseError(MpnumError, ValueError):
    """A field is not a number; ``line`` and ``column`` are 1-based."""

    def __init__(self, line: int, column: int, token: str):
        self.line, self.column, self.token = line, column, token
        super().__init__(f"line {line}, column {column}: cannot parse {token!r} as a number")


class RaggedRows(MpnumError, ValueError):
    def __init__(self, line: int, got: int, expected: int):
        self.line, self.got, self.expected = line, got, expected
        super().__init__(f"line {line}: {got} fields, expected {expected}")


def _parse_field(tok: str, line: int, col: int) -> float:
    t = tok.strip()
    low = t.lower()
    if low in _SPECIAL:
        return _SPECIAL[low]
    try:
        v = float(t)
    except ValueError:
        raise ParseError(line, col, tok) from None
    if not math.isfinite(v):  # reject spellings like "infinity" or "1e999"
        raise ParseError(line, col, tok)
    return v


def read_matrix_csv(path, precision=Precision.DOUBLE, cols: Optional[int] = None) -> MPArray:
    """Read a rectangular CSV into a matrix rounded to ``precision``.

    Blank lines are skipped.  An empty file gives a ``0 x cols`` matrix
    (``cols`` defaults to 0).

    Raises
    ------
    OSError
        If the file cannot be read.
    ParseError
        On a non-numeric field, with its line and column.
    RaggedRows
        If a row's field count differs from the first row's.
    """
    p = parse_precision(precision)
    rows: List[List[float]] = []
    width = cols
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            if width is None:
                width = len(rec)
            elif len(rec) != width:
                raise RaggedRows(lineno, len(rec), width)
            rows.append([_parse_field(tok, lineno, c) for c, tok in enumerate(rec, start=1)])
    if not rows:
        return from_numpy(np.zeros((0, width or 0)), p)
    return from_numpy(np.array(rows, dtype=np.float64), p)


def _fmt(v: float, digits: int) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.{digits}g}"


def write_matrix_csv(path, a: MPArray) -> None:
    """Write ``a`` row-major (a vector is written as one column)."""
    digits = _DIGITS[a.precision]
    M = a.to_numpy()
    if M.ndim == 1:
        M = M[:, None]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([_fmt(float(v), digits) for v in row])


@dataclass
class BenchRecord:
    """One benchmark observation."""

    op: str
    n: int
    precision: str
    placement: str
    reps: int
    median_seconds: float
    rel_frob_err: float

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.rel_frob_err >= 0:
            raise ValueError("rel_frob_err must be non-negative")


RESULT_FIELDS = [f.name for f in fields(BenchRecord)]


@contextlib.contextmanager
def _sink(target):
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="") as fh:
            yield fh


def write_results(path, records: Iterable[BenchRecord], format: str = "csv") -> None:  # noqa: A002
    """Persist records as CSV (with header) or as a JSON array of flat objects.

    ``path`` may also be an open text stream.
    """
    records = list(records)
    if format == "json":
        with _sink(path) as fh:
            json.dump([asdict(r) for r in records], fh, indent=2)
            fh.write("\n")
    elif format == "csv":
        with _sink(path) as fh:
            w = csv.DictWriter(fh, fieldnames=RESULT_FIELDS, lineterminator="\n")
            w.writeheader()
            for r in records:
                row = asdict(r)
                row["median_seconds"] = repr(float(r.median_seconds))
                row["rel_frob_err"] = repr(float(r.rel_frob_err))
                w.writerow(row)
    else:
        raise ValueError(f"unknown results format {format!r}; expected csv or json")


def read_results(path, format: Optional[str] = None) -> List[BenchRecord]:
    """Inverse of :func:`write_results` (format inferred from the extension)."""
    if format is None:
        format = "json" if os.fspath(path).endswith(".json") else "csv"
    if format == "json":
        with open(path) as fh:
            raw = json.load(fh)
    else:
        with open(path, newline="") as fh:
            raw = list(csv.DictReader(fh))
    out = []
    for r in raw:
        out.append(
            BenchRecord(
                op=str(r["op"]),
                n=int(r["n"]),
                precision=str(r["precision"]),
                placement=str(r["placement"]),
                reps=int(r["reps"]),
                median_seconds=float(r["median_seconds"]),
                rel_frob_err=float(r["rel_frob_err"]),
            )
        )
    return out
