"""Single-line ``key=value`` records and their CSV form.

Values never contain whitespace: floats use ``repr`` (shortest round-trip),
booleans are ``true``/``false`` and missing values are ``-``.
"""
import csv
import io
import math

MISSING = "-"


def format_value(v):
    if v is None:
        return MISSING
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))  # np.float64 subclasses float but has its own repr
    if hasattr(v, "item") and not isinstance(v, str):  # numpy scalars
        return format_value(v.item())
    text = str(v)
    if any(ch.isspace() for ch in text):
        raise ValueError(f"record value may not contain whitespace: {text!r}")
    return text


def format_record(rec: dict) -> str:
    return " ".join(f"{k}={format_value(v)}" for k, v in rec.items())


def parse_value(text):
    if text == MISSING:
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_record(line: str) -> dict:
    out = {}
    for tok in line.split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise ValueError(f"malformed record token {tok!r}")
        out[key] = parse_value(val)
    return out


def read_records(path):
    with open(path) as fh:
        return [parse_record(line) for line in fh if line.strip()]


def to_csv(rows, columns=None) -> str:
    if not rows:
        return ""
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: format_value(row.get(k)) for k in columns})
    return buf.getvalue()


def same_value(a, b):
    if isinstance(a, float) and isinstance(b, float):
        return a == b or (math.isnan(a) and math.isnan(b))
    return a == b
