"""Tabular results and their CSV serialization."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SIG_DIGITS = 12


@dataclass(frozen=True)
class Table:
    """Named columns of equal length. String columns are allowed."""

    name: str
    columns: dict

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"table {self.name!r}: columns have unequal lengths {sorted(lengths)}")

    @property
    def header(self) -> list[str]:
        return list(self.columns)

    def __len__(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def __getitem__(self, key):
        return self.columns[key]

    def rows(self):
        cols = list(self.columns.values())
        for i in range(len(self)):
            yield [c[i] for c in cols]


def format_value(value) -> str:
    """Decimal notation with 12 significant digits; booleans as true/false, None empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        if x == 0.0:
            return "0"
        return np.format_float_positional(x, precision=SIG_DIGITS, unique=False,
                                          fractional=False, trim="-")
    return str(value)


def table_to_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.header)
    for row in table.rows():
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def emit_csv(table: Table, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(table_to_csv(table))
    return path
