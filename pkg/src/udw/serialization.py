"""CSV and JSON emission shared by the library and the CLI.

CSV files are RFC-4180 style with CRLF line ends, ``.`` decimal separator and
floats printed with 17 significant digits (exact round trip).  Infinite
values are written as ``inf``/``-inf`` in both formats.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

import numpy as np

SCHEMA_VERSION = "1.0"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if v is None:
        return ""
    text = str(v)
    if any(c in text for c in ',"\r\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def format_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Render a header and rows as CSV text."""
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    return "\r\n".join(lines) + "\r\n"


def jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps_report(payload: dict) -> str:
    """Deterministic JSON text (sorted keys, schema_version included)."""
    body = dict(payload)
    body.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(jsonable(body), sort_keys=True, indent=2) + "\n"
