"""Command line behavior: flags, report files, and exit codes."""
import csv
import shutil
from pathlib import Path

import yaml

from hotspotsim.cli import main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
SINGLE = str(SCENARIOS / "single_client.yaml")
REPORT_NAMES = {"schedule.csv", "power_trace.csv", "energy_summary.csv", "qos.csv"}


def read_csv(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def dead_link_scenario() -> dict:
    return {
        "horizon_s": 10,
        "capacity_bps": 1_000_000,
        "models": {
            "wlan": {
                "kind": "wlan",
                "active_throughput_bps": 5_000_000,
                "sleep_state": "off",
                "idle_state": "active",
                "states": {
                    "active": {"power_mw": 1000, "can_transfer": True},
                    "off": {"power_mw": 0},
                },
                "transitions": [
                    {"from": "off", "to": "active", "latency_us": 0},
                    {"from": "active", "to": "off", "latency_us": 0},
                ],
            }
        },
        "clients": [{"id": "c1", "interfaces": {"wlan": "wlan"}}],
        "links": [
            {
                "client": "c1",
                "interface": "wlan",
                "steps": [{"t_us": 0, "throughput_bps": 0, "quality": 1.0}],
            }
        ],
        "streams": [
            {
                "client": "c1",
                "bitrate_bps": 128_000,
                "start_us": 0,
                "duration_s": 5,
                "prebuffer_bytes": 8_000,
                "buffer_capacity_bytes": 262_144,
                "max_startup_latency_ms": 500,
            }
        ],
    }


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "usage:" in capsys.readouterr().out


def test_missing_scenario_is_a_usage_error(capsys):
    assert main([]) == 1
    err = capsys.readouterr().err
    assert "usage:" in err
    assert "hotspotsim: error:" in err


def test_single_run_writes_the_four_reports(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["--scenario", SINGLE, "--out", str(out), "--no-figures"])
    assert code == 0
    assert {p.name for p in out.iterdir()} == REPORT_NAMES
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == f"scenario {SINGLE}"
    assert lines[1] == "  edf over 100 s, 1 clients, 25 bursts"
    assert lines[2] == "  scheduled energy 2560 mJ, avg power 25.600000 mW"
    assert (
        lines[3]
        == "  qos: underflows 0, startup violations 0, deadline misses 0,"
        " failures 0, overflows 0, rejected 0"
    )
    assert lines[4] == "  switches 0, wake gap conflicts 0"
    assert lines[5] == f"  reports in {out}"
    schedule = read_csv(out / "schedule.csv")
    assert schedule[0] == ["client", "interface", "start_us", "end_us", "bytes"]
    assert schedule[1] == ["c1", "wlan", "0", "102400", "64000"]
    assert len(schedule) == 26
    qos = read_csv(out / "qos.csv")
    assert qos == [["event", "client", "t_us", "detail"]]
    trace = read_csv(out / "power_trace.csv")
    assert trace[0] == ["client", "interface", "t_us", "power_mw"]
    assert trace[1] == ["c1", "wlan", "0", "1000"]
    summary = read_csv(out / "energy_summary.csv")
    assert summary[0] == ["client", "interface", "mode", "energy_mj", "avg_power_mw", "savings"]
    assert summary[-1] == ["all", "all", "scheduled", "2560", "25.600000", ""]
    assert len(summary) == 4  # header + interface + client + grand rows


def test_figures_are_rendered_by_default(tmp_path):
    out = tmp_path / "o"
    assert main(["--scenario", SINGLE, "--out", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == REPORT_NAMES | {
        "power_trace.png",
        "energy_summary.png",
    }


def test_baseline_flag_reports_savings(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["--scenario", SINGLE, "--out", str(out), "--baseline", "--no-figures"])
    assert code == 0
    assert "  baseline energy 100000 mJ, savings 0.974400" in capsys.readouterr().out
    summary = read_csv(out / "energy_summary.csv")
    assert ["all", "all", "scheduled", "2560", "25.600000", "0.974400"] in summary
    assert ["all", "all", "baseline", "100000", "1000.000000", ""] in summary
    assert len(summary) == 7  # header + two rows per scope


def test_unservable_scenario_exits_2_and_logs_events(tmp_path, capsys):
    path = tmp_path / "dead.yaml"
    path.write_text(yaml.safe_dump(dead_link_scenario(), sort_keys=False))
    out = tmp_path / "o"
    code = main(["--scenario", str(path), "--out", str(out), "--no-figures"])
    assert code == 2
    stdout = capsys.readouterr().out
    assert (
        "  qos: underflows 0, startup violations 1, deadline misses 0,"
        " failures 2, overflows 0, rejected 0" in stdout
    )
    assert read_csv(out / "qos.csv") == [
        ["event", "client", "t_us", "detail"],
        ["burst_failure", "c1", "0", "64000 bytes: no viable interface"],
        ["burst_failure", "c1", "500000", "16000 bytes: no viable interface"],
        ["startup_violation", "c1", "500000", "playback never started"],
    ]
    assert read_csv(out / "schedule.csv") == [
        ["client", "interface", "start_us", "end_us", "bytes"]
    ]


def test_missing_file_is_an_input_error(tmp_path, capsys):
    missing = tmp_path / "nope.yaml"
    assert main(["--scenario", str(missing), "--out", str(tmp_path / "o")]) == 1
    assert f"error: {missing}:" in capsys.readouterr().err


def test_broken_yaml_is_an_input_error(tmp_path, capsys):
    path = tmp_path / "broken.yaml"
    path.write_text("clients: [unclosed\n")
    assert main(["--scenario", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "error:" in capsys.readouterr().err


def test_validation_problems_are_input_errors(tmp_path, capsys):
    data = dead_link_scenario()
    data["capacity_bps"] = 0
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(data, sort_keys=False))
    assert main(["--scenario", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "capacity_bps must be positive" in capsys.readouterr().err


def test_directory_fan_out(tmp_path, capsys):
    indir = tmp_path / "batch"
    indir.mkdir()
    shutil.copy(SINGLE, indir / "a.yaml")
    shutil.copy(SINGLE, indir / "b.yml")
    out = tmp_path / "o"
    code = main(["--scenario", str(indir), "--out", str(out), "--no-figures"])
    assert code == 0
    assert {p.name for p in (out / "a").iterdir()} == REPORT_NAMES
    assert {p.name for p in (out / "b").iterdir()} == REPORT_NAMES
    lines = capsys.readouterr().out.splitlines()
    headers = [l for l in lines if l.startswith("scenario ")]
    assert headers == [f"scenario {indir / 'a.yaml'}", f"scenario {indir / 'b.yml'}"]


def test_directory_with_a_failing_file_exits_1(tmp_path, capsys):
    indir = tmp_path / "batch"
    indir.mkdir()
    shutil.copy(SINGLE, indir / "a.yaml")
    (indir / "b.yaml").write_text("clients: [unclosed\n")
    code = main(["--scenario", str(indir), "--out", str(tmp_path / "o"), "--no-figures"])
    assert code == 1
    captured = capsys.readouterr()
    assert f"scenario {indir / 'a.yaml'}" in captured.out
    assert "error:" in captured.err


def test_empty_directory_is_an_error(tmp_path, capsys):
    indir = tmp_path / "batch"
    indir.mkdir()
    assert main(["--scenario", str(indir), "--out", str(tmp_path / "o")]) == 1
    assert "error: no scenario files in" in capsys.readouterr().err


def test_scheduler_override(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(
        ["--scenario", SINGLE, "--out", str(out), "--scheduler", "wfq", "--no-figures"]
    )
    assert code == 0
    assert "  wfq over 100 s, 1 clients, 25 bursts" in capsys.readouterr().out


def test_seed_flag_is_accepted(tmp_path):
    out = tmp_path / "o"
    assert main(["--scenario", SINGLE, "--out", str(out), "--seed", "7", "--no-figures"]) == 0
