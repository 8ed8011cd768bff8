import json
import subprocess
import sys

import pytest

from localep.cli import main

TOY_NET = '{"kind":"explicit","members":[{"kind":"rect-indicator","lo":[-0.5],"hi":[0.0]}]}'
TOY = ["--n", "2", "--h", "0.2", "--seed", "fixed-points:0.55,0.9"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv, expected", [
    (["osc", "--n", "2", "--h", "0.15", "--seed", "fixed-points:0.2,0.3"], "1.27279"),
    (["kde", *TOY, "--z", "0.5", "--kernel", "uniform"], "2.5"),
    (["local", *TOY, "--z", "0.5", "--net", TOY_NET], "0.70503"),
    (["local", *TOY, "--z", "0.5", "--net", TOY_NET, "--mode", "raw-E"], "1.26491"),
    (["poisson", "--n", "2", "--h", "0.2", "--seed", "fixed-points:0.55", "--z", "0.5",
      "--net", TOY_NET], "0.793159 1"),
    (["dist", "--gram", "[[0.25,0],[0,0.25]]", "--psi", "1", "1"], "0.646447"),
    (["rate", "--gram", "[[0.5,0.5],[0.5,1.0]]", "--psi", "0.5", "1.0"], "0.5"),
    (["validate-schedule", "--kind", "power", "--alpha", "0.5", "--n", "100", "1000000"],
     "H.i pass, H.ii pass, H.iii pass"),
])
def test_golden(capsys, argv, expected):
    code, out, err = run(capsys, *argv)
    assert code == 0
    assert out.strip() == expected
    echoed = json.loads(err.strip().splitlines()[0])
    assert echoed["command"] == argv[0]


def test_band_csv(capsys, tmp_path):
    path = tmp_path / "band.csv"
    code, out, _ = run(capsys, "band", *TOY, "--z", "0.5", "0.1", "--kernel", "uniform",
                       "--out", str(path))
    assert code == 0
    assert out.splitlines() == ["z,f_n,halfwidth", "0.5,2.5,4.48531", "0.1,0,0"]
    assert path.read_text() == out


def test_echo_roundtrips_flags(capsys):
    _, _, err = run(capsys, "osc", "--n", "2", "--h", "0.15", "--seed", "7", "--digits", "4")
    cfg = json.loads(err.strip().splitlines()[0])
    assert cfg["n"] == 2 and cfg["h"] == 0.15 and cfg["seed"] == {"seed": 7} and cfg["digits"] == 4


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["osc", "--n", "2"],
    ["osc", "--n", "2", "--h", "1.5"],
    ["osc", "--n", "3", "--h", "0.15", "--seed", "fixed-points:0.2,0.3"],
    ["osc", "--n", "2", "--h", "0.15", "--bogus"],
    ["kde", "--n", "10", "--h", "0.2", "--z", "0.5", "--density", '{"kind":"triangular","oops":1}'],
    ["validate-schedule", "--kind", "custom-table", "--table", "100:0.1", "1000:0.2",
     "--n", "100", "1000"],
    ["experiment", "--config", "/nonexistent/config.json"],
])
def test_exit_one(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 1


def test_exit_two_names_module(capsys):
    code, _, err = run(capsys, "local", *TOY, "--z", "1.5")
    assert code == 2
    assert "localep.local_process" in err


def test_dry_run_computes_nothing(capsys):
    code, out, err = run(capsys, "osc", "--n", "2", "--h", "0.15", "--dry-run")
    assert code == 0 and out == "" and "dry run" in err


def test_help_lists_subcommands(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0
    for name in ("osc", "kde", "band", "local", "dist", "rate", "poisson", "experiment",
                 "validate-schedule"):
        assert name in out


def _exp_config(tmp_path):
    doc = {"experiment_id": "EXP-B", "density": {"kind": "uniform-box", "low": [0.0], "high": [1.0]},
           "n_list": [500], "seeds": [0, 1], "schedule": {"kind": "power", "alpha": 0.5,
                                                          "threshold": 2}}
    path = tmp_path / "exp_b.json"
    path.write_text(json.dumps(doc))
    return path


def test_experiment_writes_files(capsys, tmp_path):
    cfg = _exp_config(tmp_path)
    code, out, _ = run(capsys, "experiment", "--config", str(cfg), "--out", str(tmp_path / "res"))
    assert code == 0
    assert (tmp_path / "res" / "EXP-B.csv").exists()
    assert (tmp_path / "res" / "EXP-B.summary.json").exists()


def test_output_env_var(capsys, tmp_path, monkeypatch):
    cfg = _exp_config(tmp_path)
    monkeypatch.setenv("LOCALEP_OUTPUT_DIR", str(tmp_path / "env"))
    code, _, _ = run(capsys, "experiment", "--config", str(cfg))
    assert code == 0
    assert (tmp_path / "env" / "EXP-B.csv").exists()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "localep.cli", "osc", "--n", "2", "--h", "0.15",
                           "--seed", "fixed-points:0.2,0.3"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "1.27279"
