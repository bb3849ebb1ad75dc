import json
import subprocess
import sys

import pytest

from susyband.cli import config_hash, dumps, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_dumps_format():
    d = json.loads(dumps({"x": 0.1, "y": float("nan")}))
    assert d == {"x": 0.1, "y": None}


def test_config_hash_is_order_independent():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
    assert config_hash({"a": 1, "output_dir": "x"}) == config_hash({"a": 1, "output_dir": "y"})


def test_classify(capsys, tmp_path):
    code, d = run_cli(capsys, "classify", "--class", "D", "--dim", "2", "--out", str(tmp_path))
    assert code == 0
    assert (d["result"]["group"], d["result"]["category"]) == ("Z", "NL")
    for key in ("command", "config_hash", "tolerances", "ok", "failures"):
        assert key in d
    on_disk = json.loads((tmp_path / "classify.json").read_text())
    assert (on_disk["group"], on_disk["category"]) == ("Z", "NL")


def test_pair_outputs_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code, _ = run_cli(capsys, "pair", "--grid", "32", "--out", str(out))
        assert code == 0
    for name in ("spectrum.csv", "duality_report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rep = json.loads((a / "duality_report.json").read_text())
    assert rep["ok"] is True


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": {"name": "kitaev", "mu": 3.0, "t": 0.7}, "grid": [32]}))
    _, d1 = run_cli(capsys, "winding", "--config", str(cfg), "--out", str(tmp_path / "w1"))
    _, d2 = run_cli(capsys, "winding", "--config", str(cfg), "--mu", "1.0", "--out", str(tmp_path / "w2"))
    assert d1["result"]["winding"] == 0
    assert d2["result"]["winding"] == 1
    assert d1["config_hash"] != d2["config_hash"]


def test_chern_cli(capsys, tmp_path):
    code, d = run_cli(capsys, "chern", "--model", "chiral_sc", "--m", "1", "--grid", "32x32",
                      "--construction", "general", "--out", str(tmp_path))
    assert code == 0 and d["result"]["chern"] == 1


@pytest.mark.parametrize("argv", [
    ["classify", "--class", "XYZ", "--dim", "1"],
    ["pair", "--grid", "31"],
    ["chern", "--model", "chiral_sc", "--m", "2", "--grid", "16x16"],
])
def test_config_errors_exit_2(capsys, tmp_path, argv):
    code, d = run_cli(capsys, *argv, "--out", str(tmp_path))
    assert code == 2 and d["error"] == "ConfigInvalid"


def test_unknown_config_key_exit_2(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, d = run_cli(capsys, "pair", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 2


def test_numerical_failure_exit_1(capsys, tmp_path):
    # the local trivial supercharge does not exist in the topological phase
    code, d = run_cli(capsys, "chern", "--model", "chiral_sc", "--m", "1", "--grid", "16x16",
                      "--construction", "local", "--out", str(tmp_path))
    assert code == 1


def test_oracle_cli(capsys, tmp_path):
    code, d = run_cli(capsys, "oracle", "--out", str(tmp_path))
    assert code == 0 and d["ok"] is True


def test_thread_env(tmp_path):
    env = {"SUSYBAND_THREADS": "1", "PATH": "/usr/bin:/bin"}
    proc = subprocess.run([sys.executable, "-m", "susyband.cli", "classify", "--class", "BDI", "--dim", "1",
                           "--out", str(tmp_path)], capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["category"] == "LS"
    env["SUSYBAND_THREADS"] = "zero"
    proc = subprocess.run([sys.executable, "-m", "susyband.cli", "classify", "--class", "BDI", "--dim", "1",
                           "--out", str(tmp_path)], capture_output=True, text=True, env=env)
    assert proc.returncode == 2
