"""Snapshot and diagnostics output.

Snapshots are raw little-endian float64 arrays (C order, fields
concatenated) next to a JSON header naming grid dims, chart and fields.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

DIAGNOSTIC_COLUMNS = ("step", "time", "M", "P1", "P2", "E", "mode_amp", "max_div")


def write_snapshot(path, fields: dict, grid, extra: dict = None) -> Path:
    """Write ``<path>.bin`` and ``<path>.json``; returns the header path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    entries, offset = [], 0
    with open(path.with_suffix(".bin"), "wb") as fh:
        for name, arr in fields.items():
            arr = np.ascontiguousarray(arr, dtype="<f8")
            fh.write(arr.tobytes())
            entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
            offset += arr.nbytes
    header = {
        "grid": list(grid.shape),
        "chart": grid.chart.name,
        "chart_params": {k: v for k, v in grid.chart.params.items()},
        "dtype": "float64",
        "byte_order": "little",
        "data": path.with_suffix(".bin").name,
        "fields": entries,
    }
    if extra:
        header.update(extra)
    hpath = path.with_suffix(".json")
    hpath.write_text(json.dumps(header, indent=2, sort_keys=True, default=_jsonable))
    return hpath


def read_snapshot(header_path) -> dict:
    header_path = Path(header_path)
    header = json.loads(header_path.read_text())
    raw = (header_path.parent / header["data"]).read_bytes()
    out = {}
    for e in header["fields"]:
        count = int(np.prod(e["shape"]))
        out[e["name"]] = np.frombuffer(raw, dtype="<f8", count=count,
                                       offset=e["offset"]).reshape(e["shape"])
    return out


def write_distribution(path, f) -> Path:
    """Debug dump of a distribution field (values plus velocity-node layout)."""
    return write_snapshot(path, {"f": f.values, "node_theta": f.node_theta,
                                 "standard_nodes": f.quad.standard_nodes,
                                 "weights": f.quad.weights}, f.grid,
                          {"quad_order": f.quad.order, "tau": f.tau})


class DiagnosticsWriter:
    """Streams rows to ``diagnostics.csv``, flushing each one so aborted runs keep their history."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", newline="")
        self._w = csv.writer(self._fh)
        self._w.writerow(DIAGNOSTIC_COLUMNS)

    def write(self, row: dict):
        self._w.writerow([row["step"]] + [repr(float(row[c])) for c in DIAGNOSTIC_COLUMNS[1:]])
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)
