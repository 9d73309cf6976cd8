"""CLI subcommands, output files, and exit codes."""

import pytest

from hackcar_sim.cli import main

SCENARIO = """
mode = "AutoDrive"
duration_s = 3.0
route = [[0.0, 0.0], [40.0, 0.0]]
seed = 4

[[obstacles]]
kind = "box"
x_min = 12.0
y_min = -0.8
x_max = 12.4
y_max = 0.8
"""

TRACE = """time_s,kind,value
0.5,attack,start
"""


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.toml"
    path.write_text(SCENARIO)
    return path


def test_validate_ok(scenario_file, capsys):
    assert main(["validate", str(scenario_file)]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_bad_key_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text(SCENARIO + "unknown_knob = 1\n")
    assert main(["validate", str(bad)]) == 2
    assert "unknown_knob" in capsys.readouterr().err


def test_validate_missing_file_exits_2(tmp_path):
    assert main(["validate", str(tmp_path / "nope.toml")]) == 2


def test_run_writes_outputs(scenario_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", str(scenario_file), "--out", str(out),
                 "--candump", "--telemetry-csv"])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "cycles=300" in stdout
    candump = (out / "candump.log").read_text()
    telemetry = (out / "telemetry.csv").read_text()
    alerts = (out / "alerts.csv").read_text()
    assert candump.count("\n") == 900  # 3 frames per cycle
    assert telemetry.splitlines()[0].startswith("time_s,")
    assert len(telemetry.splitlines()) == 301
    assert alerts.splitlines()[0] == "time_s,id_hex,reason,observed_ms,expected_ms"


def test_run_seed_override(scenario_file, tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["run", str(scenario_file), "--out", str(out_a), "--seed", "7",
                 "--telemetry-csv"]) == 0
    assert main(["run", str(scenario_file), "--out", str(out_b), "--seed", "7",
                 "--telemetry-csv"]) == 0
    assert (out_a / "telemetry.csv").read_text() == (out_b / "telemetry.csv").read_text()


def test_replay_injects_trace(scenario_file, tmp_path):
    trace = tmp_path / "trace.csv"
    trace.write_text(TRACE)
    out = tmp_path / "out"
    code = main(["replay", "--trace", str(trace), str(scenario_file),
                 "--out", str(out), "--candump"])
    assert code == 0
    assert "502#01" in (out / "candump.log").read_text()


def test_replay_bad_trace_exits_2(scenario_file, tmp_path):
    trace = tmp_path / "trace.csv"
    trace.write_text("time_s,kind,value\n2.0,attack,start\n1.0,attack,stop\n")
    assert main(["replay", "--trace", str(trace), str(scenario_file)]) == 2
