import csv
import subprocess
import sys

import pytest

from ompx.cli import main
from ompx.signalgen import load_instance


def test_sweep_writes_csvs(tmp_path, capsys):
    out = tmp_path / "fig"
    code = main(["sweep", "--n", "16", "--m", "4", "--m", "8", "--k-min", "2", "--k-max", "3",
                 "--trials", "2", "--algo", "both", "--check-equivalence", "--out", str(out)])
    assert code == 0
    with open(f"{out}.summary.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    with open(f"{out}.trials.csv", newline="") as fh:
        assert all(r["equivalent"] == "true" for r in csv.DictReader(fh))
    assert "speedup=" in capsys.readouterr().out


def test_sweep_bad_range(tmp_path, capsys):
    code = main(["sweep", "--k-min", "9", "--k-max", "8", "--out", str(tmp_path / "x")])
    assert code == 1
    assert "k range" in capsys.readouterr().err


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--bogus"])
    assert info.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_verify(capsys):
    assert main(["verify", "--n", "16", "--m", "8", "--k", "4", "--trials", "50"]) == 0
    assert "PASS: 50/50" in capsys.readouterr().out


def test_verify_failure_exit_code(monkeypatch, capsys):
    import ompx.cli

    monkeypatch.setattr(ompx.cli, "compare_results", lambda *a, **k: (False, "forced"))
    assert main(["verify", "--n", "8", "--m", "4", "--k", "2", "--trials", "2"]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_sweep_equivalence_failure_exit_code(monkeypatch, tmp_path):
    import ompx.bench

    monkeypatch.setattr(ompx.bench, "compare_results", lambda *a, **k: (False, "forced"))
    code = main(["sweep", "--n", "8", "--m", "4", "--k-min", "2", "--k-max", "2", "--trials", "1",
                 "--check-equivalence", "--out", str(tmp_path / "f")])
    assert code == 2


def test_gen(tmp_path):
    out = tmp_path / "inst"
    assert main(["gen", "--n", "16", "--m", "8", "--k", "3", "--seed", "4", "--out", str(out)]) == 0
    inst = load_instance(out)
    assert inst.config == {"n": 16, "m": 8, "k": 3, "seed": 4}
    assert inst.Y.shape == (8, 8)


def test_env_seed_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("OMPX_SEED", "77")
    main(["gen", "--n", "8", "--m", "4", "--k", "2", "--seed", "1", "--out", str(tmp_path / "a")])
    assert load_instance(tmp_path / "a").config["seed"] == 77
    monkeypatch.setenv("OMPX_SEED", "not-a-number")
    assert main(["gen", "--n", "8", "--m", "4", "--k", "2", "--out", str(tmp_path / "b")]) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ompx", "verify", "--n", "8", "--m", "4",
                           "--k", "2", "--trials", "3"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "PASS: 3/3" in proc.stdout
