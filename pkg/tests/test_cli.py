import json
import subprocess
import sys
from importlib import resources

import pytest

from zoomsib.harness.cli import main

BUNDLED = str(resources.files("zoomsib") / "data" / "planted_clusters.csv")


def write_config(tmp_path, out):
    p = tmp_path / "exp.yaml"
    p.write_text(
        "name: cli\n"
        "environment: {type: synthetic, link: quadratic, K: 5}\n"
        "policies: [zoomsib, random]\n"
        "horizons: [200, 400]\n"
        "dimensions: [3]\n"
        "trials: 2\n"
        f"output_dir: {out}\n"
    )
    return p


def test_run_and_slope(tmp_path, capsys):
    out = tmp_path / "res"
    assert main(["--threads", "1", "run", str(write_config(tmp_path, out))]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["records"] == 8 and (out / "records.csv").exists()
    assert main(["slope", str(out / "summary.json")]) == 0
    fits = json.loads(capsys.readouterr().out)
    assert {f["policy"] for f in fits} == {"zoomsib", "random"}


def test_run_flags_after_subcommand(tmp_path, capsys):
    cfg = write_config(tmp_path, tmp_path / "ignored")
    out = tmp_path / "override"
    assert main(["run", str(cfg), "--seed", "3", "--threads", "1", "--out", str(out)]) == 0
    capsys.readouterr()
    assert json.loads((out / "summary.json").read_text())["base_seed"] == 3


def test_run_is_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path, tmp_path / "a")
    main(["--threads", "1", "run", str(cfg)])
    main(["--threads", "2", "--out", str(tmp_path / "b"), "run", str(cfg)])
    capsys.readouterr()
    assert (tmp_path / "a" / "records.csv").read_bytes() == (tmp_path / "b" / "records.csv").read_bytes()


def test_errors_are_json(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.yaml")]) != 0
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "FileNotFoundError"
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: x\nenvironment: {}\npolicies: [random]\nhorizons: [10]\nextra: 1\n")
    assert main(["run", str(bad)]) != 0
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"


def test_unwritable_output_checked_first(tmp_path, capsys, monkeypatch):
    from zoomsib.harness import cli

    called = []
    monkeypatch.setattr(cli, "run_experiment", lambda *a, **k: called.append(1))
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["--out", str(blocker / "sub"), "run", str(write_config(tmp_path, "x"))]) != 0
    assert not called
    assert "error" in json.loads(capsys.readouterr().err)


def test_validate_lb(tmp_path, capsys):
    out = tmp_path / "lb.json"
    assert main(["validate-lb", "1000", "--mc-rounds", "20000", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["ok"] and rep["N"] == 10 and rep["K"] == 277
    assert all(v["ok"] for v in rep["validity"].values())
    capsys.readouterr()


def test_ingest(tmp_path, capsys):
    out = tmp_path / "clusters.json"
    assert main(["ingest", BUNDLED, "--k", "8", "--target", "1", "--out", str(out)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["rows"] == 1000 and info["nonempty_clusters"] == 8
    assert sorted(info["cluster_reward_means"])[-2] > 0.7
    assert set(json.loads(out.read_text())) == {"centroids", "assignments", "seed"}
    assert main(["ingest", BUNDLED, "--k", "2000", "--target", "1"]) != 0


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "zoomsib", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "validate-lb" in r.stdout
