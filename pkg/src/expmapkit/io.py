"""File formats: XGRID1 rasters, PPM images, ray CSV and JSON reports."""
from __future__ import annotations

import csv
import json
import math
import struct

import numpy as np

from .errors import InvalidInput
from .probe import EscapeGrid

SCHEMA = "expmapkit/1"
XGRID_MAGIC = b"XGRID1"
_XGRID_HEADER = struct.Struct("<6s3I5d")

# first-passage step mod 16 -> RGB, a fixed hue ramp; non-escaped cells are black
COLORMAP = (
    (255, 0, 0),
    (255, 96, 0),
    (255, 192, 0),
    (224, 255, 0),
    (128, 255, 0),
    (32, 255, 0),
    (0, 255, 64),
    (0, 255, 160),
    (0, 255, 255),
    (0, 160, 255),
    (0, 64, 255),
    (32, 0, 255),
    (128, 0, 255),
    (224, 0, 255),
    (255, 0, 192),
    (255, 0, 96),
)
_LUT = np.array(COLORMAP, dtype=np.uint8)


def write_xgrid(path, g: EscapeGrid):
    re_lo, re_hi, im_lo, im_hi = g.box
    head = _XGRID_HEADER.pack(XGRID_MAGIC, g.width, g.height, g.n_max, re_lo, re_hi, im_lo, im_hi, g.T)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(g.cells, dtype="<u4").tobytes())


def read_xgrid(path, parameter: complex = 0j) -> EscapeGrid:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _XGRID_HEADER.size or data[:6] != XGRID_MAGIC:
        raise InvalidInput(f"{path} is not an XGRID1 file")
    _, w, h, n_max, re_lo, re_hi, im_lo, im_hi, T = _XGRID_HEADER.unpack_from(data)
    body = np.frombuffer(data, dtype="<u4", offset=_XGRID_HEADER.size)
    if body.size != w * h:
        raise InvalidInput(f"{path}: expected {w * h} cells, found {body.size}")
    cells = body.reshape(h, w).astype(np.uint32)
    return EscapeGrid(parameter, (re_lo, re_hi, im_lo, im_hi), w, h, n_max, T, cells)


def grid_rgb(g: EscapeGrid) -> np.ndarray:
    rgb = _LUT[(g.cells % 16).astype(np.intp)]
    rgb[~g.escaped] = 0
    return rgb


def write_ppm(path, g: EscapeGrid):
    rgb = grid_rgb(g)
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (g.width, g.height))
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise InvalidInput(f"{path} is not a binary PPM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise InvalidInput("only maxval 255 is supported")
    pix = np.frombuffer(parts[4][: w * h * 3], dtype=np.uint8)
    return pix.reshape(h, w, 3)


def write_ray_csv(path, line):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["t", "re", "im", "depth", "residual"])
        for p in line.samples:
            out.writerow([repr(p.t), repr(p.z.real), repr(p.z.imag), p.depth, repr(p.residual)])


def read_ray_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        {
            "t": float(r["t"]),
            "re": float(r["re"]),
            "im": float(r["im"]),
            "depth": int(r["depth"]),
            "residual": float(r["residual"]),
        }
        for r in rows
    ]


def jsonable(obj):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [jsonable(obj.real), jsonable(obj.imag)]
    return obj


def dumps(doc: dict) -> str:
    body = {"schema": SCHEMA}
    body.update(doc)
    return json.dumps(jsonable(body), indent=2, sort_keys=True) + "\n"


def write_json(path, doc: dict):
    with open(path, "w") as fh:
        fh.write(dumps(doc))


def itinerary_doc(it, x_star, constants, period=None) -> dict:
    return {
        "entries": it.entries,
        "flags": it.flags,
        "truncation": it.truncation,
        "x_star": x_star,
        "constants": constants,
        "periodicity": None if period is None else str(period),
    }
