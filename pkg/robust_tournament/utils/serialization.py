"""
JSON and CSV writers for CLI payloads.

Floats are written with 17 significant digits so a solve report read back
from JSON reproduces the same doubles. NaN becomes null and infinities the
strings "inf" / "-inf".
"""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np


def format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def _to_json(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "null"
        if math.isinf(value):
            return json.dumps(format_float(value))
        return format_float(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        items = (f"{json.dumps(str(key))}: {_to_json(item)}" for key, item in value.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_to_json(item) for item in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps_json(payload: Any) -> str:
    """JSON text with full double precision, newline-terminated."""
    return _to_json(payload) + "\n"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    return str(value)


def dumps_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Comma-separated text with LF line endings; cells holding commas or quotes are quoted."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([_cell(value) for value in row] for row in rows)
    return buffer.getvalue()


def write_text(text: str, path: Optional[Path]) -> Optional[Path]:
    """Write to path (creating parents) or return None so the caller uses stdout."""
    if path is None:
        return None
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    return path
