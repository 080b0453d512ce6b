import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from normalmt import subdivision as sd
from normalmt.cli import main
from normalmt.transform import Decomposition, TransformConfig

STAR = '{"kind":"trig","cx":[0,1,0,0,0,0.6],"sx":[0],"cy":[0],"sy":[0,1,0,0,0,-0.6]}'


def run(*args):
    return main([str(a) for a in args])


def read_points(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["index", "x", "y"]
    return np.array([[float(x), float(y)] for _, x, y in rows[1:]])


def finest_from_diag(path, level):
    with open(path) as fh:
        rows = [r for r in csv.DictReader(fh) if int(r["level"]) == level]
    return np.array([[float(r["x"]), float(r["y"])] for r in rows])


@pytest.fixture
def decomp(tmp_path):
    out = tmp_path / "decomp.json"
    assert run("decompose", "--curve", "circle", "--p", 3, "--normals", "lr:1",
               "--levels", 6, "--init", "quad:0.1", "--out", out) == 0
    return out


def test_decompose_writes_file(decomp, capsys):
    data = json.loads(decomp.read_text())
    assert len(data["details"]) == 6
    assert [len(d) for d in data["details"]] == [10 * 2 ** j for j in range(1, 7)]
    assert decomp.with_name("decomp.diag.csv").exists()


def test_decompose_summary(tmp_path, capsys):
    run("decompose", "--levels", 2, "--out", tmp_path / "a.json")
    summary = json.loads(capsys.readouterr().out)
    assert summary["levels_completed"] == 2 and summary["final_norm"] > 0


def test_combined_run(tmp_path):
    out = tmp_path / "c.json"
    assert run("decompose", "--p", 3, "--normals", "lr:1", "--combined", "dd:4",
               "--levels", 4, "--out", out) == 0
    cfg = json.loads(out.read_text())["config"]
    assert cfg["tangential_scheme"] == "dd:4"


def test_zero_levels(tmp_path):
    out = tmp_path / "z.json"
    assert run("decompose", "--levels", 0, "--out", out) == 0
    assert json.loads(out.read_text())["details"] == []


def test_reconstruct_round_trip(decomp, tmp_path):
    pts_csv = tmp_path / "pts.csv"
    assert run("reconstruct", decomp, "--out", pts_csv) == 0
    pts = read_points(pts_csv)
    ref = finest_from_diag(decomp.with_name("decomp.diag.csv"), 6)
    assert pts.shape == (640, 2)
    assert np.max(np.abs(pts - ref)) <= 1e-9


def test_reconstruct_truncate(decomp, tmp_path):
    full, cut = tmp_path / "f.csv", tmp_path / "t.csv"
    run("reconstruct", decomp, "--out", full)
    assert run("reconstruct", decomp, "--truncate", 2, "--out", cut) == 0
    dec = Decomposition.load(decomp)
    from normalmt.transform import reconstruct
    assert np.allclose(read_points(cut), reconstruct(dec.truncated(2)), atol=0)
    assert not np.allclose(read_points(cut), read_points(full))


def test_zero_detail_file_gives_subdivision(tmp_path):
    out = tmp_path / "z.json"
    run("decompose", "--levels", 3, "--out", out)
    data = json.loads(out.read_text())
    data["details"] = [[0.0] * len(d) for d in data["details"]]
    out.write_text(json.dumps(data))
    pts_csv = tmp_path / "p.csv"
    assert run("reconstruct", out, "--out", pts_csv) == 0
    v = np.array(data["base_points"])
    s = TransformConfig(3).predictor
    for _ in range(3):
        v = sd.apply(s, v)
    assert np.allclose(read_points(pts_csv), v, atol=1e-15)


def test_malformed_file_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("reconstruct", bad) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "format"
    bad.write_text(json.dumps({"config": {"p": 3}, "base_points": [[1, 0]] * 5,
                               "details": [[0.0] * 3]}))
    assert run("reconstruct", bad) == 3
    assert run("reconstruct", tmp_path / "missing.json") == 3


def test_config_errors_exit_4(tmp_path, capsys):
    assert run("decompose", "--p", 2, "--combined", "dd:4", "--out", tmp_path / "x.json") == 4
    assert json.loads(capsys.readouterr().err)["error"] == "config"
    assert run("decompose", "--normals", "spline:2", "--out", tmp_path / "x.json") == 4
    assert run("decompose", "--curve", "spiral", "--out", tmp_path / "x.json") == 4
    assert run("decompose", "--init", "uniform:2", "--out", tmp_path / "x.json") == 4
    assert run("decompose", "--levels", "many") == 4


def test_well_posedness_failure_exit_2(tmp_path, capsys):
    out = tmp_path / "star.json"
    code = run("decompose", "--curve", STAR, "--init", "uniform:6", "--p", 3,
               "--levels", 4, "--out", out)
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "monotonicity-violation"
    assert err["level"] == 2 and isinstance(err["index"], int)
    # the partial decomposition is still written
    assert len(json.loads(out.read_text())["details"]) == 1


def test_curve_from_json_file(tmp_path):
    spec = tmp_path / "ellipse.json"
    spec.write_text('{"kind": "ellipse", "a": 2, "b": 1}')
    out = tmp_path / "e.json"
    assert run("decompose", "--curve", spec, "--init", "param:12", "--p", 4,
               "--levels", 3, "--out", out) == 0
    assert all(min(d) > 0 for d in json.loads(out.read_text())["details"])


def test_points_file_init(tmp_path):
    ang = 2 * np.pi * np.arange(12) / 12
    pts = tmp_path / "pts.csv"
    pts.write_text("x,y\n" + "".join("%r,%r\n" % (float(np.cos(a)), float(np.sin(a))) for a in ang))
    out = tmp_path / "p.json"
    assert run("decompose", "--init", pts, "--levels", 2, "--out", out) == 0
    assert np.allclose(json.loads(out.read_text())["base_points"], np.c_[np.cos(ang), np.sin(ang)])
    empty = tmp_path / "empty.csv"
    empty.write_text("x,y\n")
    assert run("decompose", "--init", empty, "--out", out) == 3


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        run("decompose", "--combined", "dd:4", "--levels", 5, "--out", out)
    assert a.read_bytes() == b.read_bytes()
    assert a.with_name("a.diag.csv").read_bytes() == b.with_name("b.diag.csv").read_bytes()


def test_table1_command(tmp_path):
    out = tmp_path / "t.csv"
    assert run("table1", "--levels", 3, "--out", out) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["run", "j=1", "j=2", "j=3"]
    table = {r[0]: [float(x) for x in r[1:]] for r in rows[1:]}
    assert len(table) == 6
    assert table["(S3,S1,T3),h=0.01"][0] == pytest.approx(5.4040, abs=5e-4)
    assert table["(S5,S3,T5),h=0.1"][1] == pytest.approx(3.0385, abs=5e-4)


@pytest.mark.parametrize("kind", ["detail", "omega", "diff:1", "diff:2", "normal-accuracy"])
def test_orders_command(tmp_path, kind):
    out = tmp_path / "o.csv"
    assert run("orders", "--kind", kind, "--p", 3, "--levels", 5, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "j,norm,order_cumulative,order_ratio" and len(lines) == 6


def test_orders_bad_kind():
    assert run("orders", "--kind", "entropy", "--levels", 2) == 4


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "normalmt.cli", "--help"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "lr:<p>" in r.stdout and "dd:<2n>" in r.stdout
