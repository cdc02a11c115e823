"""CSV artifacts: comma separated, header row, LF line endings, repr-exact floats."""
from __future__ import annotations

import csv
import io
import os
from pathlib import Path


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "item"):  # numpy scalar
        return _fmt(value.item())
    return str(value)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_atomic(path, text: str) -> Path:
    """Write through a temporary sibling and rename, so readers never see partial files."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def write_csv(path, header, rows) -> Path:
    return write_atomic(path, csv_text(header, rows))
