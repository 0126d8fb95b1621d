import json
import math
import subprocess
import sys

import pytest

from bisteklov import cli
from bisteklov.cli import read_table, run
from bisteklov.profile import t_profile

MIXED = "bottom=steklov:1,top=hardnu,left=softfree,right=softfree"

COMMANDS = {
    "profile": ["profile", "--eval", "t", "--s", "0.3,1,25"],
    "box-spectrum": ["box-spectrum", "--sides", "1", "--height", "2", "--rho", "1", "--family", "dirichlet", "-K", "10"],
    "count": ["count", "--sides", "1,1", "--height", "2", "--rho", "1", "--family", "neumann", "--tau-grid", "50:500:50"],
    "weyl-check": ["weyl-check", "--sides", "1,1", "--height", "2", "--tau-grid", "50,100,200,500"],
    "solve2d": ["solve2d", "--rect", "1x2", "--grid", "16", "--faces", MIXED, "-K", "3"],
}


def run_to(tmp_path, argv, name="out.csv", fmt=None):
    out = tmp_path / name
    extra = ["--out", str(out)] + (["--format", fmt] if fmt else [])
    code = run(argv + extra)
    return code, out


@pytest.mark.parametrize("cmd", sorted(COMMANDS))
def test_deterministic_and_roundtrip(tmp_path, cmd):
    code1, out1 = run_to(tmp_path, COMMANDS[cmd], "a.csv")
    code2, out2 = run_to(tmp_path, COMMANDS[cmd], "b.csv")
    assert code1 == code2 == 0
    assert out1.read_bytes() == out2.read_bytes()
    table = read_table(out1)
    text = out1.read_text()
    # every float cell re-parses to the exact value that was written
    for row, line in zip(table.rows, text.splitlines()[1:]):
        for value, cell in zip(row, line.split(",")):
            if isinstance(value, float):
                assert format(value, ".17g") == cell


@pytest.mark.parametrize("cmd", sorted(COMMANDS))
def test_json_mirrors_csv(tmp_path, cmd):
    assert run_to(tmp_path, COMMANDS[cmd], "t.csv")[0] == 0
    assert run_to(tmp_path, COMMANDS[cmd], "t.json", "json")[0] == 0
    c = read_table(tmp_path / "t.csv")
    j = read_table(tmp_path / "t.json")
    assert c.columns == j.columns
    assert c.rows == j.rows
    meta = json.loads((tmp_path / "t.json").read_text())["meta"]
    assert meta["version"] == cli.__version__ and "config" in meta


def test_box_spectrum_schema(tmp_path):
    _, out = run_to(tmp_path, ["box-spectrum", "--sides", "1,1.5", "--height", "2", "--family", "neumann", "-K", "7"])
    t = read_table(out)
    assert t.columns == ("k", "lambda", "family", "m_1", "m_2")
    assert len(t.rows) == 7 and [r[0] for r in t.rows] == list(range(1, 8))
    assert {r[2] for r in t.rows} == {"neumann"}


def test_count_schema_and_bracket(tmp_path):
    _, out = run_to(tmp_path, COMMANDS["count"])
    t = read_table(out)
    assert t.columns == ("tau", "A0", "Af", "weyl_pred", "ratio0", "ratioF")
    assert len(t.rows) == 10
    assert all(r[1] <= r[2] for r in t.rows)


def test_solve_schema(tmp_path):
    _, out = run_to(tmp_path, COMMANDS["solve2d"])
    t = read_table(out)
    assert t.columns == ("k", "lambda", "rayleigh_residual")
    assert all(r[2] <= 1e-8 for r in t.rows)


def test_profile_functions(tmp_path):
    for argv in (["--eval", "h", "--t", "10"], ["--eval", "dt", "--s", "2"], ["--eval", "Y", "--eta", "2", "--height", "1.5", "--x", "0,0.5,1.5"],
                 ["--eval", "Ypp0", "--eta", "1", "--height", "1"], ["--eval", "omega", "--m", "1,2,3"]):
        code, out = run_to(tmp_path, ["profile"] + argv)
        assert code == 0
    t = read_table(out)
    assert t.rows[1][2] == math.pi


def test_cross_command_first_modes(tmp_path):
    # the first two modes are well within 2% already at N = 64
    _, fd = run_to(tmp_path, ["solve2d", "--rect", "1x2", "--grid", "64", "--faces", MIXED, "-K", "2"], "fd.csv")
    _, cf = run_to(tmp_path, ["box-spectrum", "--sides", "1", "--height", "2", "--family", "dirichlet", "-K", "2"], "cf.csv")
    for a, b in zip(read_table(fd).rows, read_table(cf).rows):
        assert abs(a[1] / b[1] - 1) <= 0.02


def test_weyl_check_meta(tmp_path):
    _, out = run_to(tmp_path, COMMANDS["weyl-check"], "w.json", "json")
    meta = json.loads(out.read_text())["meta"]
    assert meta["trend"] == "approaching_one"
    assert meta["rate_constant"] > 0
    code, out = run_to(tmp_path, ["weyl-check", "--sides", "1,1", "--height", "2", "--k-range", "10:200"], "k.csv")
    assert code == 0 and len(read_table(out).rows) == 191


@pytest.mark.parametrize("argv", [
    ["box-spectrum", "--sides", "-1", "--height", "2"],
    ["box-spectrum", "--sides", "1", "--height", "2", "-K", "0"],
    ["box-spectrum", "--sides", "1", "--height", "2", "--family", "robin"],
    ["box-spectrum", "--height", "2"],
    ["count", "--sides", "1,1", "--height", "2", "--tau-grid", "500:50:50"],
    ["count", "--sides", "1,1", "--height", "2", "--tau-grid", "abc"],
    ["profile", "--eval", "t", "--s", "-1"],
    ["profile", "--eval", "h", "--t", "3"],
    ["profile", "--eval", "zeta", "--s", "1"],
    ["solve2d", "--rect", "1x2", "--grid", "4", "--faces", MIXED],
    ["solve2d", "--rect", "1by2", "--grid", "16", "--faces", MIXED],
    ["solve2d", "--rect", "1x2", "--grid", "16", "--faces", "bottom=hardnu,top=hardnu,left=softfree,right=softfree"],
    ["weyl-check", "--sides", "1,1", "--height", "2"],
    ["weyl-check", "--sides", "1,1", "--height", "2", "--k-range", "5:2"],
])
def test_validation_exit_code(argv, capsys):
    assert run(argv) == 2
    assert "error" in capsys.readouterr().err


def test_argparse_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        run(["box-spectrum", "--bogus"])
    assert exc.value.code == 2


def test_consistency_exit_code(monkeypatch, capsys):
    import bisteklov.counting as counting

    monkeypatch.setattr(counting, "count_lattice", lambda q: -1)
    assert run(COMMANDS["count"]) == 3
    assert "consistency" in capsys.readouterr().err


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[box-spectrum]\nsides = 1\nheight = 2\nfamily = dirichlet\nK = 4\n\n[count]\nsides = 1,1\n", encoding="utf-8")
    code, out = run_to(tmp_path, ["box-spectrum", "--config", str(cfg)])
    assert code == 0
    rows = read_table(out).rows
    assert len(rows) == 4
    assert rows[0][1] == pytest.approx(t_profile(2 * math.pi) / 2, rel=1e-15)
    # flags override the file
    code, out = run_to(tmp_path, ["box-spectrum", "--config", str(cfg), "-K", "6"])
    assert len(read_table(out).rows) == 6


@pytest.mark.parametrize("text", ["[box-spectrum]\nsides = 1\nheight = 2\ncolour = red\n",
                                  "[unknown-command]\nx = 1\n",
                                  "no section header\n"])
def test_config_errors(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text, encoding="utf-8")
    assert run(["box-spectrum", "--config", str(cfg), "--sides", "1", "--height", "2"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bisteklov", "profile", "--s", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "function,argument,value,branch"
    assert proc.stdout.splitlines()[1].startswith("t,1,4.26887852261162")
