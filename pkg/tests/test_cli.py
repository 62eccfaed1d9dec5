import json
import subprocess
import sys

import numpy as np
import pytest

from expmapkit import io
from expmapkit.cli import main, read_config
from expmapkit.errors import ConfigError


def run(tmp_path, *argv, out="out"):
    d = tmp_path / out
    code = main([*argv, "--out", str(d)])
    return code, d


def load(path):
    return json.loads(path.read_text())


def test_render_attracting_basin(tmp_path):
    code, d = run(tmp_path, "render", "--a-re", "-2", "--resolution", "128x128")
    assert code == 0
    pix = io.read_ppm(d / "render.ppm")
    assert (pix == 0).all(axis=2).mean() > 0.5
    doc = load(d / "render.json")
    assert doc["schema"] == "expmapkit/1" and doc["black_fraction"] > 0.5
    assert doc["components"]["nonescaping"]["count"] >= 1
    assert io.read_xgrid(d / "render.xgrid").width == 128


def test_render_escaping_box(tmp_path):
    code, d = run(tmp_path, "render", "--box", "2.95,3.05,-0.05,0.05", "--resolution", "16")
    assert code == 0
    assert not (io.read_ppm(d / "render.ppm") == 0).all(axis=2).any()


def test_render_is_deterministic(tmp_path):
    args = ("render", "--a-re", "-0.3", "--a-im", "0.7", "--resolution", "64x40")
    run(tmp_path, *args, out="a")
    run(tmp_path, *args, out="b")
    for name in ("render.ppm", "render.json", "render.xgrid"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_ray_real(tmp_path):
    code, d = run(tmp_path, "ray", "--address", "0,0;const:0")
    assert code == 0
    rows = io.read_ray_csv(d / "ray.csv")
    assert len(rows) == 50 and all(abs(r["im"]) < 1e-8 for r in rows)
    doc = load(d / "ray.json")
    assert doc["address"] == ";const:0" and doc["max_residual"] <= 1e-9
    assert (d / "ray.png").stat().st_size > 0


def test_ray_tail_trend(tmp_path):
    code, d = run(tmp_path, "ray", "--address", ";const:1", "--t-lo", "3", "--t-hi", "30", "--count", "10")
    assert code == 0
    ims = np.array([r["im"] for r in io.read_ray_csv(d / "ray.csv")])
    assert np.all(np.diff(np.abs(ims - 2 * np.pi)) <= 1e-12)
    assert abs(ims[-1] - 2 * np.pi) < 1e-9


def test_malformed_address_writes_nothing(tmp_path):
    code, d = run(tmp_path, "ray", "--address", "0,x;const:0")
    assert code == 2 and not d.exists()


def test_not_converged_exit(tmp_path, capsys):
    code, _ = run(tmp_path, "ray", "--address", ";const:1", "--t-lo", "0.1", "--t-hi", "1", "--depth", "2", "--tol", "1e-14")
    assert code == 3
    assert "t = 0.1" in capsys.readouterr().err


def test_itinerary_examples(tmp_path):
    code, d = run(tmp_path, "itinerary", "--point", "1,3.141592653589793", "--m", "1", out="p")
    assert code == 0 and load(d / "itinerary.json")["entries"] == [0]
    code, d = run(tmp_path, "itinerary", "--ray-address", ";const:1", "--ray-t", "3", "--m", "5", out="r")
    doc = load(d / "itinerary.json")
    assert doc["entries"] == [1, 1, 1, 1, 1]
    assert doc["x_star"] == pytest.approx(2 * np.pi)
    assert doc["constants"]["M"] == pytest.approx(2 * np.pi)
    assert doc["periodicity"] == "consistent with period 1"
    assert (d / "itinerary.png").exists()


def test_itinerary_needs_escaping_parameter(tmp_path):
    code, d = run(tmp_path, "itinerary", "--a-re", "-2", "--point", "1,1")
    assert code == 4 and not d.exists()


def test_itinerary_needs_one_source(tmp_path):
    assert run(tmp_path, "itinerary")[0] == 2
    assert run(tmp_path, "itinerary", "--point", "1,1", "--ray-address", ";const:0", "--ray-t", "1")[0] == 2


def test_kneading(tmp_path):
    code, d = run(tmp_path, "kneading", "--m", "6")
    doc = load(d / "kneading.json")
    assert code == 0 and set(doc["flags"]) == {"Ambiguous(0, -1)"}
    assert doc["prediction"]["verdict"] == "Connected"


@pytest.mark.parametrize(
    "argv, cls, verdict",
    [
        ((), "SingularEscapes", "Connected"),
        (("--a-re", "-2"), "AttractingCycle", "Disconnected"),
        (("--a-im", "2", "--budget-n", "5", "--burn-in", "5"), "Undetermined", "Unknown"),
    ],
)
def test_classify(tmp_path, argv, cls, verdict):
    code, d = run(tmp_path, "classify", *argv)
    doc = load(d / "classify.json")
    assert code == 0 and doc["class"] == cls and doc["prediction"]["verdict"] == verdict
    if cls == "AttractingCycle":
        assert doc["period"] == 1


def test_probe(tmp_path):
    code, d = run(tmp_path, "probe", "--a-re", "-2", "--resolution", "96")
    assert code == 0
    doc = load(d / "probe.json")
    assert doc["witness"] is not None
    for name in ("probe.xgrid", "probe.ppm", "probe.png"):
        assert (d / name).stat().st_size > 0


def test_verify_default_and_determinism(tmp_path):
    code, d = run(tmp_path, "verify", "--samples", "2000", out="a")
    assert code == 0
    doc = load(d / "verify.json")
    assert doc["passed"] and set(doc["suites"]) == {"elementary", "sandwich", "rays", "tower", "partition"}
    run(tmp_path, "verify", "--samples", "2000", out="b")
    assert (tmp_path / "a" / "verify.json").read_bytes() == (tmp_path / "b" / "verify.json").read_bytes()


def test_verify_suite_selection(tmp_path):
    code, d = run(tmp_path, "verify", "--suite", "tower")
    doc = load(d / "verify.json")
    assert code == 0 and list(doc["suites"]) == ["tower"]
    assert doc["suites"]["tower"]["worst"] < 1e-12
    assert main(["verify", "--suite", "bogus", "--out", str(tmp_path / "x")]) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test\na-re = -2\nresolution=20x10\nbudget_n = 30\n--box=-1,1,-1,1\n")
    code, d = run(tmp_path, "render", "--config", str(cfg), out="c1")
    doc = load(d / "render.json")
    assert code == 0 and doc["resolution"] == [20, 10] and doc["n_max"] == 30 and doc["a"] == [-2.0, 0.0]
    code, d = run(tmp_path, "render", "--config", str(cfg), "--resolution", "8", out="c2")
    assert load(d / "render.json")["resolution"] == [8, 8]


def test_config_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n")
    assert run(tmp_path, "render", "--config", str(cfg))[0] == 2
    cfg.write_text("no equals sign\n")
    with pytest.raises(ConfigError):
        read_config(cfg)
    assert run(tmp_path, "render", "--config", str(tmp_path / "missing"))[0] == 2


def test_resolution_cap(tmp_path):
    code, d = run(tmp_path, "render", "--resolution", "8193x8192")
    assert code == 2 and not d.exists()


def test_argparse_errors_exit_2(tmp_path):
    assert main(["render", "--resolution", "axb"]) == 2
    assert main(["nosuchcommand"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "expmapkit", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "render" in res.stdout
