"""CSV output with reproducible float formatting."""

import csv
import io
import math


class MalformedCSVError(ValueError):
    pass


def format_float(x: float) -> str:
    """Shortest round-trip form, padded to at least 12 significant digits."""
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    padded = format(x, "#.12g")
    return padded if float(padded) == x else repr(x)


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    if hasattr(v, "dtype"):  # numpy scalar
        return _cell(v.item())
    return str(v)


def render(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def read_table(text: str, required) -> list:
    """Rows of ``text`` as dicts of floats; every ``required`` column must be present."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise MalformedCSVError("empty CSV")
    missing = [c for c in required if c not in reader.fieldnames]
    if missing:
        raise MalformedCSVError(f"missing columns: {', '.join(missing)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        try:
            out.append({k: float(row[k]) for k in required})
        except (TypeError, ValueError) as exc:
            raise MalformedCSVError(f"line {lineno}: {exc}") from None
    return out
