"""Text formats for policies, deployment traces and reports.

CSV numbers are written with six decimals, ``.`` as separator and ``\\n`` line
endings so identical inputs give byte-identical files.  Readers parse what the
writers emit; writing a read-back table reproduces the original bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .deploy import ComparisonReport, SampleRecord

POLICY_COLUMNS = ("s", "J", "a_star")
TRACE_COLUMNS = ("sample_index", "length", "n_relays", "H_seq", "H_off", "e_percent")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    out = f"{x:.6f}"
    return "0.000000" if out == "-0.000000" else out


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def write_text(path, text: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def read_csv(path_or_text, from_text: bool = False):
    """``(header, rows)`` with rows as lists of strings."""
    text = path_or_text if from_text else Path(path_or_text).read_text(encoding="utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def policy_csv(sol) -> str:
    return csv_text(POLICY_COLUMNS, zip(sol.s, sol.J, sol.policy))


def write_policy_csv(path, sol) -> None:
    write_text(path, policy_csv(sol))


def read_policy_csv(path) -> dict:
    header, rows = read_csv(path)
    if tuple(header) != POLICY_COLUMNS:
        raise ValueError(f"unexpected policy header {header}")
    cols = np.array(rows, dtype=object).T if rows else [[], [], []]
    return {name: np.array([float(v) for v in col]) for name, col in zip(POLICY_COLUMNS, cols)}


def trace_csv(records: Iterable[SampleRecord]) -> str:
    return csv_text(TRACE_COLUMNS, ((r.sample_index, r.length, r.n_relays, r.H_seq, r.H_off, r.e_percent) for r in records))


def write_trace_csv(path, records) -> None:
    write_text(path, trace_csv(records))


def read_trace_csv(path) -> list:
    header, rows = read_csv(path)
    if tuple(header) != TRACE_COLUMNS:
        raise ValueError(f"unexpected trace header {header}")
    return [SampleRecord(int(r[0]), float(r[1]), int(r[2]), float(r[3]), float(r[4]), float(r[5])) for r in rows]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isinf(v) or math.isnan(v) else v
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def write_json(path, obj) -> None:
    write_text(path, json_text(obj))


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def report_json(report: ComparisonReport) -> str:
    return json_text(report.summary())


def write_report_json(path, report: ComparisonReport) -> None:
    write_text(path, report_json(report))


def read_report_json(path) -> ComparisonReport:
    d = read_json(path)
    return ComparisonReport(**d)
