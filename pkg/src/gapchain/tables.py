"""CSV tables with exact round-tripping of numbers.

Floats are written as their shortest round-trip decimal (``repr``), complex
numbers as ``re+imi``, booleans as ``True``/``False`` and missing values as an
empty field.  :func:`read_rows` undoes :func:`write_rows` value for value.
"""

from __future__ import annotations

import csv
import math
import re
from pathlib import Path
from typing import Iterable

import numpy as np

_FLOAT = r"[+-]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf|nan)"
_INT_RE = re.compile(r"[+-]?\d+")
_FLOAT_RE = re.compile(_FLOAT)
_COMPLEX_RE = re.compile(rf"({_FLOAT})([+-](?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf|nan))i")


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "True" if x else "False"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        im = repr(z.imag)
        if not im.startswith("-"):
            im = "+" + im
        return f"{z.real!r}{im}i"
    return str(x)


def parse_value(text: str):
    if text == "":
        return None
    if text in ("True", "False"):
        return text == "True"
    if _INT_RE.fullmatch(text):
        return int(text)
    if _FLOAT_RE.fullmatch(text):
        return float(text)
    m = _COMPLEX_RE.fullmatch(text)
    if m:
        return complex(float(m.group(1)), float(m.group(2)))
    return text


def columns_of(rows: Iterable[dict]) -> list[str]:
    """Union of the row keys in first-seen order."""
    cols: list[str] = []
    seen = set()
    for row in rows:
        for k in row:
            if k not in seen:
                seen.add(k)
                cols.append(k)
    return cols


def write_rows(path, rows: list[dict], columns: list[str] | None = None) -> Path:
    path = Path(path)
    columns = columns or columns_of(rows)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(row.get(c)) for c in columns])
    return path


def read_rows(path) -> list[dict]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return [dict(zip(header, (parse_value(x) for x in line))) for line in r]


def same_value(a, b) -> bool:
    """Equality that treats two NaNs (or two complex NaN parts) as equal."""
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    if isinstance(a, complex) and isinstance(b, complex):
        return same_value(a.real, b.real) and same_value(a.imag, b.imag)
    return a == b and type(a) is type(b)
