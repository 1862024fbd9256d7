"""Bit-stable CSV and JSON-lines tables.

Floats are written with 17 significant digits, which round-trips every IEEE
double exactly, and rows keep the order they were given in. Both formats
carry the same columns; JSON lines are written by hand so that numbers use
the same formatting as CSV.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

__all__ = [
    "Table",
    "format_float",
    "write_table",
    "read_table",
    "render_table",
    "INTERVAL_COLUMNS",
    "REPORT_COLUMNS",
    "interval_table",
    "report_table",
]

INTERVAL_COLUMNS = (("p", int), ("q", int), ("V", float), ("interval_lo", float),
                    ("interval_hi", float))
REPORT_COLUMNS = (("name", str), ("p", int), ("q", int), ("delta", float), ("omega", float),
                  ("eps", float), ("measured", float), ("bound", float), ("margin", float),
                  ("pass", bool))


@dataclass
class Table:
    """Named, typed columns plus rows of plain Python values (``None`` allowed)."""

    columns: tuple
    rows: list

    @property
    def names(self) -> list[str]:
        return [c[0] for c in self.columns]


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _cell_text(v: Any, typ) -> str:
    if v is None:
        return ""
    if typ is float:
        return format_float(float(v))
    if typ is bool:
        return "true" if v else "false"
    return str(v)


def _json_value(v: Any, typ) -> str:
    if v is None:
        return "null"
    if typ is float:
        x = float(v)
        # JSON has no literal for non-finite numbers; store them as strings
        return format_float(x) if math.isfinite(x) else json.dumps(format_float(x))
    if typ is bool:
        return "true" if v else "false"
    if typ is int:
        return str(int(v))
    return json.dumps(str(v))


def render_table(table: Table, fmt: str = "csv") -> str:
    """The exact file contents for ``table`` in ``fmt`` (``"csv"`` or ``"json"``)."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.names)
        for row in table.rows:
            w.writerow([_cell_text(v, t) for v, (_, t) in zip(row, table.columns)])
        return buf.getvalue()
    if fmt == "json":
        lines = []
        for row in table.rows:
            parts = [f"{json.dumps(n)}: {_json_value(v, t)}" for v, (n, t) in zip(row, table.columns)]
            lines.append("{" + ", ".join(parts) + "}\n")
        return "".join(lines)
    raise ValueError(f"unknown format {fmt!r}")


def write_table(table: Table, path: str | os.PathLike, fmt: str = "csv") -> None:
    text = render_table(table, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _parse(text: str | None, typ):
    if text is None or text == "":
        return None
    if typ is float:
        return float(text)
    if typ is int:
        return int(text)
    if typ is bool:
        if text in ("true", "True", True):
            return True
        if text in ("false", "False", False):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    return text


def _from_json(v, typ):
    if v is None:
        return None
    if typ is bool:
        if not isinstance(v, bool):
            raise ValueError(f"not a boolean: {v!r}")
        return v
    return typ(v)


def read_table(path: str | os.PathLike, columns: Sequence, fmt: str = "csv") -> Table:
    """Parse a file written by :func:`write_table` back into a :class:`Table`."""
    columns = tuple(columns)
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "csv":
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is not None and header != [c[0] for c in columns]:
                raise ValueError(f"unexpected header {header}")
            for rec in reader:
                rows.append([_parse(v, t) for v, (_, t) in zip(rec, columns)])
        elif fmt == "json":
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                rows.append([_from_json(rec[name], typ) for name, typ in columns])
        else:
            raise ValueError(f"unknown format {fmt!r}")
    return Table(columns, rows)


def interval_table(rows: Iterable[tuple]) -> Table:
    return Table(INTERVAL_COLUMNS, [list(r) for r in rows])


def report_table(reports: Iterable) -> Table:
    rows = []
    for r in reports:
        rec = r.as_record()
        rows.append([rec[name] for name, _ in REPORT_COLUMNS])
    return Table(REPORT_COLUMNS, rows)
