"""Field and report serialization.

Fields travel as a JSON header ``{dim, h, origin, counts, name}`` with
row-major node values inline, or — with ``binary=True`` — in a
little-endian float64 sidecar next to the header.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grid import Grid, ScalarField

__all__ = ["write_field", "read_field", "write_report_document",
           "read_report_document", "merge_report_documents"]


def write_field(fld: ScalarField, path, binary: bool = False) -> None:
    path = Path(path)
    header = {
        "dim": fld.grid.dim,
        "h": fld.grid.h,
        "origin": list(fld.grid.origin),
        "counts": list(fld.grid.counts),
        "name": fld.name,
    }
    if fld.mask is not None:
        header["mask"] = fld.mask.reshape(-1).astype(int).tolist()
    if binary:
        side = path.with_suffix(path.suffix + ".bin")
        header["values_file"] = side.name
        header["dtype"] = "<f8"
        side.write_bytes(np.ascontiguousarray(
            fld.values, dtype="<f8").tobytes())
    else:
        header["values"] = fld.values.reshape(-1).tolist()
    path.write_text(json.dumps(header))


def read_field(path) -> ScalarField:
    path = Path(path)
    header = json.loads(path.read_text())
    grid = Grid(dim=int(header["dim"]), h=float(header["h"]),
                origin=tuple(header["origin"]),
                counts=tuple(int(c) for c in header["counts"]))
    if "values_file" in header:
        raw = (path.parent / header["values_file"]).read_bytes()
        vals = np.frombuffer(raw, dtype=header.get("dtype", "<f8"))
    else:
        vals = np.asarray(header["values"], dtype=float)
    if vals.size != grid.n_nodes:
        raise ValueError("value count does not match the grid")
    mask = None
    if "mask" in header:
        mask = np.asarray(header["mask"], dtype=bool).reshape(grid.counts)
    return ScalarField(grid, vals.reshape(grid.counts),
                       name=header.get("name", ""), mask=mask)


def write_report_document(reports, path, meta=None) -> dict:
    doc = {
        "meta": dict(meta or {}),
        "checks": [r.to_dict() for r in reports],
        "passed": all(r.passed for r in reports),
    }
    Path(path).write_text(json.dumps(doc, indent=2))
    return doc


def read_report_document(path) -> dict:
    return json.loads(Path(path).read_text())


def merge_report_documents(paths) -> dict:
    merged = {"meta": {"merged_from": [str(p) for p in paths]},
              "checks": [], "passed": True}
    for p in paths:
        doc = read_report_document(p)
        merged["checks"].extend(doc.get("checks", []))
        merged["passed"] = merged["passed"] and doc.get("passed", False)
    return merged
