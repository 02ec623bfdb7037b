"""Tests for the command line"""
import json

import pytest

from cli import EXIT_CONFIG, EXIT_DOMAIN, EXIT_OK, run_cli


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps({"n": 16, "T": 1.25, "target": {"kind": "sine", "k": 1}}))
    return str(path)


def _run(config, out, *command):
    return run_cli([*command, "--config", config, "--out", str(out)])


def test_steer_writes_artifacts(small_config, tmp_path, capsys):
    out = tmp_path / "run"
    assert _run(small_config, out, "steer") == EXIT_OK
    assert capsys.readouterr().out.startswith("✓ steer:")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["terminal_residual"] <= 1e-6 * (1 + summary["target_norm"])
    assert summary["n"] == 16
    header, first = (out / "trajectory.csv").read_text().splitlines()[:2]
    assert header == "t,xi,z"
    assert first.split(",")[0] == "0"
    assert (out / "control.csv").read_text().startswith("t,xi,u\n")
    # (nt + 1) times n rows plus the header
    assert len((out / "control.csv").read_text().splitlines()) == 21 * 16 + 1


def test_steer_is_reproducible(small_config, tmp_path):
    """Two runs write byte-identical files"""
    assert _run(small_config, tmp_path / "a", "steer") == EXIT_OK
    assert _run(small_config, tmp_path / "b", "steer") == EXIT_OK
    for name in ("trajectory.csv", "control.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_linear_control(small_config, tmp_path):
    out = tmp_path / "linear"
    assert _run(small_config, out, "linear-control") == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["reconstruction_residual"] <= 1e-8 * 2
    assert summary["gramian"]["cond_estimate"] < 1e12


def test_simulate_from_rest(small_config, tmp_path):
    """Without control the zero state stays put since f(0) = 0"""
    out = tmp_path / "sim"
    assert _run(small_config, out, "simulate") == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["final_norm"] == 0.0
    assert summary["nt"] == 20


def test_probes(small_config, tmp_path):
    out = tmp_path / "probes"
    assert _run(small_config, out, "probe-lipschitz", "--m-max", "100") == EXIT_OK
    report = json.loads((out / "probes.json").read_text())
    assert abs(report["estimate"] - 10.0) <= 1e-9

    assert _run(small_config, out, "probe-dissipative", "--pairs", "200", "--seed", "5") == EXIT_OK
    report = json.loads((out / "probes.json").read_text())
    assert report["estimate"] <= 1e-12
    assert report["seed"] == 5

    assert _run(small_config, out, "mnc", "--sets", "5") == EXIT_OK
    report = json.loads((out / "probes.json").read_text())
    assert report["within_bound"] is True


def test_missing_config_file(tmp_path, capsys):
    """Configuration errors exit with 2 and JSON on stderr"""
    code = _run(str(tmp_path / "missing.json"), tmp_path / "out", "steer")
    assert code == EXIT_CONFIG
    captured = capsys.readouterr()
    assert json.loads(captured.err.strip().splitlines()[-1])["error"] == "ConfigInvalid"
    assert captured.out.startswith("✗ steer")


def test_invalid_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 4, "T": 0.3}))
    assert _run(str(path), tmp_path / "out", "steer") == EXIT_CONFIG
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "n: must be an integer >= 8" in error["fields"]


def test_uncontrollable_model(tmp_path, capsys):
    """A control profile with a dead cell is a domain error"""
    path = tmp_path / "dead.json"
    values = [1.0] * 16
    values[3] = 0.0
    path.write_text(json.dumps({"n": 16, "m_profile": {"kind": "table", "values": values}}))
    assert _run(str(path), tmp_path / "out", "linear-control") == EXIT_DOMAIN
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "NotControllable"


def test_selftest(capsys):
    """Every runtime invariant check passes"""
    assert run_cli(["selftest", "--seed", "2024"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 10
    assert all(line.startswith("✓") for line in lines)


@pytest.mark.parametrize(
    "steering",
    [{"max_iter": 2.5}, {"max_iter": "5"}, {"stagnation_window": "3"}],
)
def test_mistyped_steering_options(tmp_path, capsys, steering):
    """Bad option types exit with 2 instead of a traceback"""
    path = tmp_path / "typed.json"
    path.write_text(json.dumps({"n": 16, "steering": steering}))
    assert _run(str(path), tmp_path / "out", "steer") == EXIT_CONFIG
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "ConfigInvalid"


def test_unparseable_csv_target(tmp_path, capsys):
    target = tmp_path / "target.csv"
    target.write_text("xi,value\nfoo,bar\n")
    path = tmp_path / "csv.json"
    path.write_text(json.dumps({"n": 16, "target": {"kind": "csv", "path": str(target)}}))
    assert _run(str(path), tmp_path / "out", "steer") == EXIT_CONFIG
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["fields"][0].startswith("target.path:")
