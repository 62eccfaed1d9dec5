import json
import math
import struct

import numpy as np
import pytest

from expmapkit import io
from expmapkit.errors import InvalidInput
from expmapkit.probe import SENTINEL, escape_grid
from expmapkit.rays import ExternalAddress, trace_polyline


@pytest.fixture
def grid():
    return escape_grid(-0.5 + 0.2j, (-3, 3, -2, 2), (12, 8), n_max=40)


def test_xgrid_round_trip(tmp_path, grid):
    path = tmp_path / "g.xgrid"
    io.write_xgrid(path, grid)
    data = path.read_bytes()
    assert data[:6] == b"XGRID1"
    assert len(data) == 58 + 4 * 12 * 8
    w, h, n_max = struct.unpack_from("<3I", data, 6)
    assert (w, h, n_max) == (12, 8, 40)
    back = io.read_xgrid(path, grid.parameter)
    assert np.array_equal(back.cells, grid.cells)
    assert back.box == grid.box and back.T == grid.T


def test_xgrid_rejects_garbage(tmp_path):
    path = tmp_path / "x"
    path.write_bytes(b"NOTAGRID" * 10)
    with pytest.raises(InvalidInput):
        io.read_xgrid(path)


def test_ppm(tmp_path, grid):
    path = tmp_path / "g.ppm"
    io.write_ppm(path, grid)
    assert path.read_bytes().startswith(b"P6\n12 8\n255\n")
    pix = io.read_ppm(path)
    assert pix.shape == (8, 12, 3)
    black = (pix == 0).all(axis=2)
    assert np.array_equal(black, grid.cells == SENTINEL)
    esc = grid.cells != SENTINEL
    expect = np.array(io.COLORMAP, dtype=np.uint8)[grid.cells[esc] % 16]
    assert np.array_equal(pix[esc], expect)


def test_colormap_has_no_black():
    assert len(io.COLORMAP) == 16
    assert all(max(c) > 0 for c in io.COLORMAP)


def test_ray_csv_round_trip(tmp_path):
    line = trace_polyline(0.2, ExternalAddress.parse("1;const:0"), 0.8, 4, 7)
    path = tmp_path / "r.csv"
    io.write_ray_csv(path, line)
    assert path.read_text().splitlines()[0] == "t,re,im,depth,residual"
    rows = io.read_ray_csv(path)
    assert [complex(r["re"], r["im"]) for r in rows] == list(line.zs)
    assert [r["t"] for r in rows] == list(line.ts)


def test_json_conventions():
    text = io.dumps({"x": math.inf, "z": 1 + 2j, "v": np.float64(0.5), "n": np.int64(3), "ok": np.bool_(True)})
    doc = json.loads(text)
    assert doc["schema"] == "expmapkit/1"
    assert doc == {"schema": "expmapkit/1", "x": "inf", "z": [1.0, 2.0], "v": 0.5, "n": 3, "ok": True}
    assert text == io.dumps({"ok": True, "n": 3, "v": 0.5, "z": 1 + 2j, "x": math.inf})
