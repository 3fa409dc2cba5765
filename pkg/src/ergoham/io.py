"""Field files and deterministic tabular output.

ERGH layout (little-endian)::

    b"ERGH"  uint8 version  uint8 dim  uint32 n  uint32 nt  float64 T
    float64 values[nt][n]...[n]   (row-major)

Every ``.ergh`` file gets a ``.json`` sidecar holding the same header and the
values as nested lists, for debugging.
"""

from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .grid import SpaceTimeField, TimeGrid, TorusGrid

MAGIC = b"ERGH"
VERSION = 1
_HEADER = struct.Struct("<4sBBIId")


class FieldFormatError(ValueError):
    pass


def write_field(path: str | Path, f: SpaceTimeField, sidecar: bool = True) -> Path:
    path = Path(path)
    space, time = f.space, f.time
    header = _HEADER.pack(MAGIC, VERSION, space.dim, space.n, time.n_steps, time.period)
    data = np.ascontiguousarray(f.values, dtype="<f8")
    path.write_bytes(header + data.tobytes())
    if sidecar:
        meta = {"format": "ERGH", "version": VERSION, "dim": space.dim, "n": space.n,
                "nt": time.n_steps, "period": time.period, "shape": list(f.values.shape),
                "values": f.values.tolist()}
        path.with_suffix(".json").write_text(json.dumps(meta) + "\n")
    return path


def read_field(path: str | Path) -> SpaceTimeField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FieldFormatError(f"{path}: too short for an ERGH header")
    magic, version, dim, n, nt, period = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"{path}: unsupported version {version}")
    shape = (nt,) + (n,) * dim
    count = int(np.prod(shape))
    body = raw[_HEADER.size:]
    if len(body) != 8 * count:
        raise FieldFormatError(f"{path}: expected {count} values, found {len(body) // 8}")
    values = np.frombuffer(body, dtype="<f8").reshape(shape).astype(float)
    time = TimeGrid.degenerate(period) if nt == 1 else TimeGrid(period, nt)
    return SpaceTimeField(values, TorusGrid(dim, n), time)


def format_number(v) -> str:
    """17 significant digits for floats; integers and strings unchanged."""
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return format(v, ".17g")
    return str(v)


def write_csv(path: str | Path, rows: list[dict]) -> Path:
    """Columns in first-seen order; nested values are written as JSON."""
    path = Path(path)
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            cells = []
            for key in columns:
                v = row.get(key, "")
                cells.append(json.dumps(v) if isinstance(v, (list, dict)) else format_number(v))
            w.writerow(cells)
    return path


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return _clean(v.item())
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def write_json(path: str | Path, data: dict) -> Path:
    """Deterministic JSON: insertion key order, round-trip float precision."""
    path = Path(path)
    path.write_text(json.dumps(_clean(data), indent=2) + "\n")
    return path


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
