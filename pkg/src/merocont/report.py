"""Deterministic CSV and JSON output.

Floats are written with 17 significant digits so values round-trip exactly;
key order follows the producing record, never a hash order.
"""

import csv
import io
import json
import math
import sys


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_value(v):
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        # JSON has no non-finite numbers; those become strings.
        s = format_float(v)
        return s if math.isfinite(v) else json.dumps(s)
    if isinstance(v, complex):
        return _json_value({"re": v.real, "im": v.imag})
    if isinstance(v, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items())
        return "{" + items + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if hasattr(v, "item"):
        return _json_value(v.item())
    return json.dumps(str(v))


def to_json(results):
    """One JSON document: an object for a dict, an array for a list."""
    return _json_value(results) + "\n"


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    if hasattr(v, "item"):
        return _csv_cell(v.item())
    return str(v)


def to_csv(results, columns=None):
    """CSV text with a header row; ``columns`` fixes the header when empty."""
    rows = [results] if isinstance(results, dict) else list(results)
    if columns is None:
        if not rows:
            raise ValueError("columns are required for an empty result set")
        columns = list(rows[0].keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def emit_report(results, fmt="csv", destination=None, columns=None):
    """Write ``results`` (a dict or a list of dicts) as CSV or JSON.

    ``destination`` is a path, a writable text stream or ``None`` for stdout.
    """
    if fmt == "json":
        text = to_json(results)
    elif fmt == "csv":
        text = to_csv(results, columns)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if destination is None:
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
