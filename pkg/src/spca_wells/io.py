"""CSV and JSON writers that stamp every file with provenance metadata."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

from . import __version__


def config_digest(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def provenance(cfg: dict, seed) -> dict:
    return {"tool_version": __version__, "config_digest": config_digest(cfg), "master_seed": seed}


def fmt(value) -> str:
    """Cell text: floats at 17 significant digits, booleans lower-case, None empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if isinstance(value, (tuple, list)):
        return " ".join(fmt(v) for v in value)
    if hasattr(value, "item"):
        return fmt(value.item())
    return str(value)


def write_csv(path, header, rows, meta: dict) -> None:
    with open(path, "w", newline="") as fh:
        for key, val in meta.items():
            fh.write(f"# {key}={fmt(val)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_csv(path) -> tuple[dict, list, list]:
    """Returns ``(meta, header, rows)`` with all cells as strings."""
    meta, lines = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = val
            else:
                lines.append(line)
    table = list(csv.reader(lines))
    return meta, table[0], table[1:]


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def write_json(path, doc: dict, meta: dict | None = None) -> None:
    doc = dict(doc)
    if meta is not None:
        doc["meta"] = meta
    Path(path).write_text(json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n")
