import csv
import io
import json
import subprocess
import sys

import pytest

from ietspec.cli import main, verify_suite


def run_cli(tmp_path, config, *flags, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return main(["--config", str(path), *flags])


def test_condition_b_golden(tmp_path):
    out = tmp_path / "out"
    config = {"task": "condition-b", "iet": "golden", "params": {"depth": 500}}
    assert run_cli(tmp_path, config, "--out", str(out)) == 0
    rows = list(csv.DictReader(io.StringIO((out / "condition-b.csv").read_text())))
    assert len(rows) == 500
    assert all(float(r["score_approx"]) > 0 for r in rows)
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["status"] == "ok" and meta["mode"] == "exact"
    assert len(meta["config_sha256"]) == 64


def test_spectrum_free(tmp_path, capsys):
    config = {"task": "spectrum", "params": {"word": "1", "potential": {"values": ["0"]}}}
    out = tmp_path / "out"
    assert run_cli(tmp_path, config, "--out", str(out)) == 0
    doc = json.loads((out / "spectrum.json").read_text())
    assert len(doc["bands"]) == 1
    assert doc["bands"][0]["left"]["value"] == "-2"
    assert doc["bands"][0]["right"]["value"] == "2"
    assert doc["measure_lower"] == doc["measure_upper"] == "4"


def test_spectrum_to_stdout(tmp_path, capsys):
    config = {"task": "spectrum", "params": {"word": "1", "potential": {"values": ["0"]}}}
    assert run_cli(tmp_path, config) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"spectrum.json", "spectrum.csv"}


def test_insufficient_window(tmp_path):
    out = tmp_path / "out"
    config = {"task": "gordon-scan", "iet": "golden", "params": {"x": "1/3", "max_k": 50, "lo": -10, "hi": 20}}
    assert run_cli(tmp_path, config, "--out", str(out)) == 1
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "insufficient-window"
    assert json.loads((out / "metadata.json").read_text())["status"] == "error"


def test_math_error_exit_one(tmp_path):
    config = {"task": "tower", "iet": {"n": 2, "perm": [1, 2], "lambda": ["1/2", "1/2"]}}
    assert run_cli(tmp_path, config, "--out", str(tmp_path / "o")) == 1


@pytest.mark.parametrize("config,flags", [
    ({"task": "spectrum", "params": {"word": "1"}, "mode": "interval"}, ()),
    ({"task": "no-such-task"}, ()),
    ({"task": "itinerary"}, ()),
    ({"task": "itinerary", "iet": {"perm": [2, 1], "lambda": ["one", "1/2"]}}, ()),
    ({"task": "fibonacci-check", "params": {"orders": [1, 5]}}, ()),
    ({"task": "verify"}, ("--seed", "-1")),
])
def test_usage_errors(tmp_path, config, flags):
    assert run_cli(tmp_path, config, *flags) == 2


def test_bad_mode_flag(tmp_path):
    with pytest.raises(SystemExit) as info:
        run_cli(tmp_path, {"task": "spectrum"}, "--mode", "interval")
    assert info.value.code == 2


def test_unreadable_config(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["--config", str(tmp_path / "bad.json")]) == 2


@pytest.mark.parametrize("config", [
    {"task": "condition-b", "iet": "golden", "params": {"depth": 200}},
    {"task": "fibonacci-check", "params": {"orders": [3, 10], "count": 5}},
    {"task": "candidates", "iet": {"rotation": "2601/5000"}, "params": {"levels": 3}},
    {"task": "gordon-scan", "iet": "golden", "params": {"x": "2/7", "max_k": 300, "energies": ["-1", "0", "1"]}},
    {"task": "spectrum", "params": {"words": ["12", "211"], "n": 2}},
])
def test_deterministic_payloads(tmp_path, config):
    outputs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        assert run_cli(tmp_path, config, "--out", str(out), "--seed", "11", name=f"c{i}.json") == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "metadata.json"})
    assert outputs[0] == outputs[1]


@pytest.mark.parametrize("config", [
    {"task": "rauzy-orbit", "iet": "golden", "params": {"steps": 4}},
    {"task": "classes", "params": {"perm": [4, 3, 2, 1]}},
    {"task": "tower", "iet": {"rotation": "2601/5000"}, "params": {"levels": 3}},
    {"task": "gordon-tower", "iet": {"rotation": "2601/5000"}, "params": {"levels": 3, "x": "1/20"}},
    {"task": "itinerary", "iet": "golden", "params": {"x": "1/3", "hi": 20}},
    {"task": "cylinders", "iet": "golden", "params": {"depth": 6}},
    {"task": "eigenbox", "params": {"word": "1111", "q": 4, "potential": {"values": ["0"]}}},
    {"task": "lyapunov", "iet": "golden", "params": {"x": "1/3", "length": 1000, "energies": ["0", "3"]}},
    {"task": "hull-check", "params": {"word": "1213", "n": 3}},
])
def test_every_task_runs(tmp_path, config):
    out = tmp_path / "out"
    assert run_cli(tmp_path, config, "--out", str(out)) == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["files"] and all((out / f).exists() for f in meta["files"])


def test_rauzy_orbit_golden_output(tmp_path, capsys):
    assert run_cli(tmp_path, {"task": "rauzy-orbit", "iet": "golden", "params": {"steps": 2}}) == 0
    steps = json.loads(capsys.readouterr().out)["steps"]
    assert steps[1]["lambda"] == ["3/2-1/2*sqrt(5)", "-1/2+1/2*sqrt(5)"]


def test_eigenbox_free(tmp_path):
    out = tmp_path / "out"
    config = {"task": "eigenbox", "params": {"word": "11", "q": 2, "potential": {"values": ["0"]}}}
    assert run_cli(tmp_path, config, "--out", str(out)) == 0
    rows = list(csv.DictReader(io.StringIO((out / "eigenbox.csv").read_text())))
    assert [round(float(r["eigenvalue"]), 9) for r in rows] == [-1.0, 1.0]


def test_verify_suite_passes():
    results = verify_suite(0)
    assert [name for name, _, _ in results] == [
        "rauzy-vs-induce", "tiling-identity", "trace-map-invariant", "hull-invariance",
        "gordon-containment", "periodic-candidates", "negative-control-reducible", "negative-control-tie"]
    assert all(ok for _, ok, _ in results), results


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ietspec", "--task", "classes", "--config",
                           str(_write(tmp_path, {"params": {"perm": [2, 1]}}))],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["size"] == 1


def _write(tmp_path, config):
    path = tmp_path / "entry.json"
    path.write_text(json.dumps(config))
    return path
