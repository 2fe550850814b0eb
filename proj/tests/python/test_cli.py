import json
import os
import subprocess

import pytest

CLI = os.environ.get("SPINLAB_CLI", "spinlab")


def run(*args, input=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, input=input)


@pytest.fixture
def hard_core(tmp_path):
    path = tmp_path / "hc.json"
    r = run("catalog", "hard_core", "--lambda", "1", "--out", str(path))
    assert r.returncode == 0, r.stderr
    return path


def test_catalog_metadata(hard_core):
    doc = json.loads(hard_core.read_text())
    meta = doc["metadata"]
    assert meta["tool"] == "spinlab"
    assert meta["subcommand"] == "catalog"
    assert len(meta["system_hash"]) == 16
    assert doc["states"] == ["0", "1"]


def test_round_trip_is_stable(hard_core, tmp_path):
    again = tmp_path / "again.json"
    r = run("transform", "project", "--system", str(hard_core), "--out", str(again))
    assert r.returncode == 0, r.stderr
    assert len(json.loads(again.read_text())["states"]) == 3


def test_zfun_and_check(hard_core):
    z = json.loads(run("zfun", "--system", str(hard_core), "--d", "1", "--psi", "product:all", "--method", "both").stdout)
    assert z["Z"] == "7" and z["agree"]
    c = json.loads(run("check", "--system", str(hard_core), "--d", "1e12").stdout)
    assert c["pass"] is True


def test_sweep_is_csv(hard_core):
    r = run("check", "--system", str(hard_core), "--sweep", "d=100:1000000000000:geometric:5")
    assert r.returncode == 0, r.stderr
    lines = r.stdout.strip().splitlines()
    assert lines[0].startswith("# ")
    assert lines[1].startswith("d,pass")
    assert len(lines) == 2 + 5


def test_exit_codes(tmp_path):
    r = run("frobnicate")
    assert r.returncode == 2
    assert json.loads(r.stderr)["error"] == "UnknownSubcommand"
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    r = run("analyze", "--system", str(bad))
    assert r.returncode == 2
    assert json.loads(r.stderr)["error"] == "SchemaError"
