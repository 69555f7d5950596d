"""Snapshot persistence and CSV output.

A snapshot is a directory holding ``meta.json`` and ``field.f64`` (raw
little-endian doubles, row-major with axis 0 slowest).
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .grid import Grid
from .measures import CSV_COLUMNS, DiagnosticsRecord
from .solver import PhaseState

FORMAT_VERSION = "1"
META_NAME = "meta.json"
FIELD_NAME = "field.f64"
SNAPSHOT_DIR = "snapshots"
CSV_NAME = "diagnostics.csv"


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def snapshot_name(step: int) -> str:
    return f"step_{step:09d}"


def save_snapshot(state: PhaseState, directory, extras=None) -> Path:
    """Write ``state`` into ``directory``; ``extras`` are merged into the metadata."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    meta = {
        "format-version": FORMAT_VERSION,
        "dim": state.grid.dim,
        "nodes": list(state.grid.nodes),
        "extent": list(state.grid.extent),
        "h": state.grid.h,
        "epsilon": state.epsilon,
        "delta": state.delta,
        "t": state.t,
        "scheme": state.scheme,
    }
    if extras:
        meta.update(extras)
    # json writes floats with repr, which round-trips exactly
    (d / META_NAME).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    np.ascontiguousarray(state.field, dtype="<f8").tofile(d / FIELD_NAME)
    return d


def load_snapshot(directory):
    """Return ``(PhaseState, meta dict)``."""
    d = Path(directory)
    meta = json.loads((d / META_NAME).read_text(encoding="utf-8"))
    if meta.get("format-version") != FORMAT_VERSION:
        raise ValueError(f"unsupported snapshot format {meta.get('format-version')!r} in {d}")
    grid = Grid(tuple(meta["nodes"]), tuple(meta["extent"]))
    raw = np.fromfile(d / FIELD_NAME, dtype="<f8")
    if raw.size != int(np.prod(grid.nodes)):
        raise ValueError(f"{d / FIELD_NAME} holds {raw.size} values, expected {np.prod(grid.nodes)}")
    field = raw.astype(np.float64).reshape(grid.nodes)
    state = PhaseState(field, grid, meta["epsilon"], meta["delta"], meta["t"], meta["scheme"])
    return state, meta


def list_snapshots(run_dir):
    root = Path(run_dir) / SNAPSHOT_DIR
    if not root.is_dir():
        return []
    return sorted(p for p in root.iterdir() if (p / META_NAME).is_file())


class CSVWriter:
    """Streams diagnostics rows; floats get 17 significant digits."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "w", newline="", encoding="utf-8")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(CSV_COLUMNS)

    def write(self, rec: DiagnosticsRecord):
        self._w.writerow([fmt_float(v) for v in rec.row()])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_records(path, records):
    with CSVWriter(path) as w:
        for rec in records:
            w.write(rec)


def read_records(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path} does not have the diagnostics header")
    return [DiagnosticsRecord(*(float(v) for v in r)) for r in rows[1:]]


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def file_listing(root):
    """``[{path, bytes, sha256}]`` for every file under ``root`` (sorted, relative paths)."""
    root = Path(root)
    out = []
    for dirpath, _, files in sorted(os.walk(root)):
        for name in sorted(files):
            p = Path(dirpath) / name
            out.append({"path": p.relative_to(root).as_posix(), "bytes": p.stat().st_size,
                        "sha256": sha256(p)})
    return out
