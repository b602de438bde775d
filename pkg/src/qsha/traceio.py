"""CSV trace files: ``time,location,kind,<variables...>``.

Floats are written with 17 significant digits so a write/read cycle is
bit-exact.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import TextIO

from .trace import INTER, INTRA, Trace

FIXED_COLUMNS = ("time", "location", "kind")


class TraceFormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_trace(trace: Trace, out: TextIO):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(FIXED_COLUMNS + trace.variables)
    n = len(trace.variables)
    for i in range(len(trace)):
        row = trace.values[i * n : (i + 1) * n]
        w.writerow([_fmt(trace.times[i]), trace.locations[i], trace.kinds[i], *map(_fmt, row)])


def save_trace(trace: Trace, path: str | Path):
    with open(path, "w", newline="") as fh:
        write_trace(trace, fh)


def trace_to_text(trace: Trace) -> str:
    buf = io.StringIO()
    write_trace(trace, buf)
    return buf.getvalue()


def read_trace(src: TextIO) -> Trace:
    rows = csv.reader(src)
    try:
        header = next(rows)
    except StopIteration:
        raise TraceFormatError("empty trace file") from None
    if tuple(header[:3]) != FIXED_COLUMNS:
        raise TraceFormatError(f"trace header must start with {','.join(FIXED_COLUMNS)}")
    trace = Trace(header[3:])
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise TraceFormatError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        if row[2] not in (INTRA, INTER):
            raise TraceFormatError(f"line {lineno}: unknown kind {row[2]!r}")
        try:
            time, values = float(row[0]), [float(v) for v in row[3:]]
        except ValueError as exc:
            raise TraceFormatError(f"line {lineno}: {exc}") from None
        trace.append(time, row[1], values, row[2])
    return trace


def load_trace(path: str | Path) -> Trace:
    with open(path, newline="") as fh:
        return read_trace(fh)
