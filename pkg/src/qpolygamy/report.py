"""Report records, table rendering and atomic report files."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

TABLE_COLUMNS = ("check", "q", "d", "sample_index", "gap", "verdict", "seed", "value")
SIG_DIGITS = 12


def render_number(x):
    """Round floats to 12 significant digits; other values pass through."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return x
        return float(f"{x:.{SIG_DIGITS}g}")
    return x


def rendered(obj):
    if isinstance(obj, dict):
        return {k: rendered(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rendered(v) for v in obj]
    return render_number(obj)


@dataclass
class ReportRecord:
    command: str
    config: dict
    items: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    wall_time: float = 0.0
    version: str = ""
    seed: int = 0

    def meta(self) -> dict:
        return {
            "type": "meta",
            "command": self.command,
            "config": self.config,
            "summary": self.summary,
            "version": self.version,
            "seed": self.seed,
            "wall_time": self.wall_time,
        }


def _csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def emit_table(record: ReportRecord, fmt: str) -> bytes:
    """CSV with TABLE_COLUMNS, or JSON lines: one meta line, then one line
    per item. Floats carry 12 significant digits."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for item in record.items:
            w.writerow([_csv_cell(item.get(c)) for c in TABLE_COLUMNS])
        return buf.getvalue().encode()
    if fmt == "json-lines":
        lines = [json.dumps(rendered(record.meta()), sort_keys=True)]
        lines += [json.dumps(rendered({"type": "item", **it}), sort_keys=True) for it in record.items]
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r}")


def atomic_write(path: str, payload: bytes) -> None:
    """Write to a temporary file next to `path`, then rename over it."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
