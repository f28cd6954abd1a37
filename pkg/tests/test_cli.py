import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sogeom.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_phase_report(capsys):
    code, out, _ = run(capsys, "phase", "--l", "2", "--mu", "-0.5", "--branch", "-", "--g", "3", "--omega", "1.7")
    assert code == 0
    rep = json.loads(out)
    assert abs(rep["sum_rule_residual"]) < 1e-10
    assert rep["defined"] == {"L": True, "S": True}
    assert set(rep) >= {"total", "marginal_L", "marginal_S", "visibility"}


def test_phase_extremal(capsys):
    code, out, _ = run(capsys, "phase", "--l", "1", "--mu", "1.5", "--g", "2", "--omega", "1.3")
    rep = json.loads(out)
    assert code == 0 and rep["branch"] == "extremal"
    assert math.remainder(rep["total"]["value"] + 1.5 * 1.3, 2 * math.pi) == pytest.approx(0, abs=1e-10)


def test_phase_undefined_marginal(capsys):
    code, out, _ = run(capsys, "phase", "--l", "2", "--mu", "-0.5", "--branch", "-", "--g", "1", "--omega", "1")
    rep = json.loads(out)
    assert code == 0
    assert rep["marginal_S"]["value"] is None and rep["sum_rule_residual"] is None


def test_phase_singular_coupling(capsys):
    code, _, err = run(capsys, "phase", "--l", "2", "--mu", "-0.5", "--branch", "-", "--g", "0", "--omega", "1")
    assert code == 2
    assert "singular decoupling point" in err


@pytest.mark.parametrize("argv", [
    ["phase", "--l", "2", "--mu", "0.5", "--g", "1", "--omega", "1"],  # interior without branch
    ["phase", "--l", "2", "--mu", "1", "--branch", "+", "--g", "1", "--omega", "1"],
    ["phase", "--l", "2", "--mu", "0.5", "--branch", "+", "--g", "1"],
    ["scan", "--nx", "0"],
    ["winding"],
])
def test_invalid_configs(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_phase_with_oracle(capsys):
    loop = json.dumps({"kind": "circle", "theta0": math.pi / 3, "samples": 4096})
    code, out, _ = run(capsys, "phase", "--l", "2", "--mu", "-0.5", "--branch", "-", "--g", "3",
                       "--loop", loop, "--oracle")
    rep = json.loads(out)
    assert code == 0
    assert rep["omega"] == pytest.approx(math.pi)
    for key in ("marginal_L", "marginal_S"):
        d = rep["oracle"][key]["value"] - rep[key]["value"]
        assert abs(math.remainder(d, 2 * math.pi)) < 1e-4


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_scan_single_cell(capsys):
    code, out, _ = run(capsys, "scan", "--omega-min", "0", "--omega-max", "0", "--nx", "1",
                       "--g-min", "5", "--g-max", "5", "--ny", "1", "--jobs", "1")
    rows = read_csv(out)
    assert code == 0
    assert rows == [["omega", "g", "phase", "visibility", "defined"], ["0", "5", "0", "1", "1"]]


def test_scan_paschen_back(capsys):
    code, out, _ = run(capsys, "scan", "--omega-min", str(math.pi / 2), "--omega-max", str(math.pi / 2),
                       "--nx", "1", "--g-min", "1000", "--g-max", "1000", "--ny", "1", "--jobs", "1")
    row = read_csv(out)[1]
    assert abs(float(row[2]) - math.pi / 4) < 2e-3


def test_scan_default_grid(tmp_path):
    path = tmp_path / "grid.csv"
    assert main(["scan", "-o", str(path), "--jobs", "1"]) == 0
    rows = read_csv(path.read_text())[1:]
    assert len(rows) == 201 * 201
    undefined = [(float(r[0]), float(r[1])) for r in rows if r[4] == "0"]
    assert all(g == 1.0 for _, g in undefined)
    assert any(abs(om - math.pi) < 1e-9 for om, _ in undefined)


def test_scan_deterministic(tmp_path):
    args = ["scan", "--nx", "21", "--ny", "15"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main([*args, "--jobs", "1", "-o", str(a)]) == 0
    assert main([*args, "--jobs", "2", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"l": 2, "mu": -0.5, "branch": "-", "g": 3.0, "omega": 1.7}))
    code, out, _ = run(capsys, "phase", "--config", str(cfg))
    assert code == 0 and json.loads(out)["g"] == 3.0
    code, out, _ = run(capsys, "phase", "--config", str(cfg), "--g", "5")
    assert code == 0 and json.loads(out)["g"] == 5.0


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"l": 2, "colour": "red"}))
    code, _, err = run(capsys, "phase", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_winding_json(capsys):
    code, out, _ = run(capsys, "winding", "--rect", str(math.pi - 0.5), str(math.pi + 0.5), "0.5", "1.5",
                       "--no-trace")
    rep = json.loads(out)
    assert code == 0
    assert rep["winding"] == 1 and rep["orientation"] == "ccw" and "trace" not in rep
    code, out, _ = run(capsys, "winding", "--rect", str(math.pi - 0.5), str(math.pi + 0.5), "0.5", "1.5",
                       "--clockwise", "--no-trace")
    assert json.loads(out)["winding"] == -1


def test_winding_points(capsys):
    pts = json.dumps([[2.5, 0.5], [2.5, 1.5], [3.8, 1.5], [3.8, 0.5]])
    code, out, _ = run(capsys, "winding", "--points", pts, "--no-trace")
    assert code == 0 and json.loads(out)["winding"] == 1


def test_winding_too_close(capsys):
    code, _, err = run(capsys, "winding", "--rect", str(math.pi - 1e-5), "4", "0.5", "1.5")
    assert code == 4 and "nodal point" in err


def test_verify_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "nodal")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert {c["suite"] for c in rep["checks"]} == {"nodal"}


def test_unwritable_output(capsys):
    code, _, err = run(capsys, "phase", "--l", "1", "--mu", "1.5", "--g", "2", "--omega", "1",
                       "-o", "/nonexistent/dir/out.json")
    assert code == 2 and "cannot write" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sogeom", "phase", "--l", "1", "--mu", "1.5", "--g", "2",
                           "--omega", "0"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["total"]["value"] == 0.0
