"""CSV / JSON emission with shortest round-trip float formatting."""
from __future__ import annotations

import csv
import datetime as _dt
import enum
import json
import math
from pathlib import Path

import numpy as np

from . import __version__


class OutputError(OSError):
    pass


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def _plain(obj):
    """Recursively convert numpy scalars/arrays and enums to JSON-native types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def emit_csv(path, columns, rows) -> Path:
    """Write ``rows`` (mappings or sequences) under a single header row."""
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                vals = [row[c] for c in columns] if isinstance(row, dict) else row
                w.writerow([fmt(v) for v in vals])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def emit_json(path, payload) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def emit_jsonl(path, records) -> Path:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(_plain(rec), sort_keys=True) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def write_manifest(out_dir, config_text: str, config_values: dict, derived: dict | None = None,
                   files: list[str] | None = None, status: str = "running") -> Path:
    out_dir = Path(out_dir)
    payload = {
        "tool": "slowlight",
        "version": __version__,
        "status": status,
        "written_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config_text": config_text,
        "config": config_values,
        "derived": derived or {},
        "files": files or [],
    }
    return emit_json(out_dir / "manifest.json", payload)
