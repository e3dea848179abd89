"""CLI behaviour: subcommands, units, exit codes, reproducible outputs."""

import subprocess
import sys
from pathlib import Path

import pytest

from rtpslab.cli import main, parse_byte_list, parse_bytes

SCENARIOS = Path(__file__).parent.parent / "scenarios"
GOLDEN = Path(__file__).parent / "golden"


def test_parse_bytes_suffixes():
    assert parse_bytes("231k") == 231000
    assert parse_bytes("1m") == 1_000_000
    assert parse_bytes("65536") == 65536


def test_parse_byte_list_range_defaults_step_to_start():
    assert parse_byte_list("33k..99k") == [33000, 66000, 99000]
    assert parse_byte_list("1k..5k:2k") == [1000, 3000, 5000]
    assert parse_byte_list("1k,5k,44k") == [1000, 5000, 44000]


def test_model_delivery_lossless_all_cells_full(capsys):
    assert main(["model", "delivery", "--per", "0", "--payloads", "33k..330k",
                 "--no-plot"]) == 0
    out = capsys.readouterr().out
    rows = out.strip().split("\n")[1:]
    assert len(rows) == 10
    assert all(row.endswith(",1.000000,100.00") for row in rows)


def test_model_rdds_amplification_column(capsys):
    assert main(["model", "rdds", "--per", "0.1", "--payloads", "33k..330k",
                 "--nip", "1,5,44", "--no-plot"]) == 0
    rows = capsys.readouterr().out.strip().split("\n")[1:]
    nip44 = [r.split(",") for r in rows if r.split(",")[1] == "44"]
    assert len(nip44) == 10
    for fields in nip44:
        assert float(fields[5]) == pytest.approx(5.0542, abs=1e-3)


def test_model_burst_marks_default_rate(capsys):
    assert main(["model", "burst", "--pub-rate-mbps", "480", "--per", "0.1",
                 "--no-plot"]) == 0
    rows = capsys.readouterr().out.strip().split("\n")[1:]
    marked = [r for r in rows if r.endswith(",true")]
    assert marked and all(r.split(",")[1].startswith("0.333333") for r in marked)


def test_model_burst_monotone_in_retx_rate(capsys):
    assert main(["model", "burst", "--pub-rate-mbps", "16", "--per", "0.1",
                 "--pub-rates", "30", "--retx-rates", "0.333,1,10,30,60",
                 "--no-plot"]) == 0
    rows = capsys.readouterr().out.strip().split("\n")[1:]
    bursts = [float(r.split(",")[3]) for r in rows]
    assert all(a > b for a, b in zip(bursts, bursts[1:]))


def test_model_empty_grid_usage_error(capsys):
    assert main(["model", "rdds", "--payloads", ",", "--no-plot"]) == 1


def test_optimize_writes_golden_xml(tmp_path, capsys):
    out = tmp_path / "p.xml"
    assert main(["optimize", "-r", "30", "-u", "231000", "--link-mbps", "433",
                 "--util", "0.6", "-o", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == (
        GOLDEN / "wireless_opt_30hz_231k.xml").read_text(encoding="utf-8")


def test_optimize_fig7_budget(tmp_path, capsys):
    out = tmp_path / "p.xml"
    assert main(["optimize", "-r", "30", "-u", "231000", "--link-mbps", "240",
                 "--util", "1.0", "-o", str(out)]) == 0
    assert "history cache    : 129 samples" in capsys.readouterr().out


def test_optimize_rejects_bad_utilization(tmp_path):
    assert main(["optimize", "-r", "30", "-u", "231k", "--link-mbps", "433",
                 "--util", "1.1", "-o", str(tmp_path / "p.xml")]) == 1


def test_optimize_feasibility_output(tmp_path, capsys):
    assert main(["optimize", "-r", "30", "-u", "231k", "--link-mbps", "433",
                 "--util", "0.6", "--per", "0.2", "-o", str(tmp_path / "p.xml")]) == 0
    out = capsys.readouterr().out
    assert "FEASIBLE" in out and "burst" in out


def test_simulate_ideal_aggregate_near_publish_rate(tmp_path, capsys):
    out_dir = tmp_path / "run"
    assert main(["simulate", str(SCENARIOS / "ideal.json"), "--trials", "2",
                 "--seed", "1", "--out-dir", str(out_dir), "--no-plot"]) == 0
    metrics = (out_dir / "metrics.csv").read_text(encoding="utf-8").strip().split("\n")
    aggregate = metrics[-1].split(",")
    assert aggregate[0].endswith("[aggregate:mean]")
    assert float(aggregate[3]) == pytest.approx(30.0, abs=0.5)
    assert aggregate[-1] == "true"
    assert (out_dir / "trace_trial0.csv").exists()
    assert (out_dir / "trace_trial1.csv").exists()


def test_simulate_same_seed_byte_identical(tmp_path):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        assert main(["simulate", str(SCENARIOS / "severe_loss.json"), "--trials", "2",
                     "--seed", "9", "--out-dir", str(d), "--no-plot"]) == 0
    for name in ("metrics.csv", "trace_trial0.csv", "trace_trial1.csv"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()


def test_simulate_env_seed_override(tmp_path, monkeypatch):
    monkeypatch.setenv("RTPSLAB_SEED", "9")
    a = tmp_path / "env"
    assert main(["simulate", str(SCENARIOS / "severe_loss.json"), "--trials", "1",
                 "--out-dir", str(a), "--no-plot"]) == 0
    monkeypatch.delenv("RTPSLAB_SEED")
    b = tmp_path / "flag"
    assert main(["simulate", str(SCENARIOS / "severe_loss.json"), "--trials", "1",
                 "--seed", "9", "--out-dir", str(b), "--no-plot"]) == 0
    assert (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()


def test_simulate_missing_scenario_io_error(tmp_path):
    assert main(["simulate", str(tmp_path / "nope.json"), "--no-plot",
                 "--out-dir", str(tmp_path)]) == 3


def test_simulate_renders_figure(tmp_path):
    out_dir = tmp_path / "fig"
    assert main(["simulate", str(SCENARIOS / "ideal.json"), "--trials", "1",
                 "--seed", "1", "--out-dir", str(out_dir), "--plot"]) == 0
    assert (out_dir / "reception_timeline.png").stat().st_size > 1000


def test_validate_lossless_exact(tmp_path, capsys):
    out_dir = tmp_path / "val"
    assert main(["validate", "--rounds", "1500", "--ps", "1.0", "--nips", "1,44",
                 "--seed", "1", "--out-dir", str(out_dir), "--no-plot"]) == 0
    out = capsys.readouterr().out
    assert "rate dev 0.00%" in out
    assert (out_dir / "agreement.csv").exists()


def test_validate_tolerance_breach_exit_two(monkeypatch, capsys):
    # starve the estimator: 250 rounds post-warmup is far too few for p=0.9
    import rtpslab.validate as validate_mod

    monkeypatch.setattr(validate_mod, "RATE_TOLERANCE", 1e-6)
    assert main(["validate", "--rounds", "450", "--ps", "0.9", "--nips", "44",
                 "--seed", "1", "--no-plot"]) == 2


def test_usage_error_exit_code_one():
    with pytest.raises(SystemExit) as exc:
        main(["model"])  # missing required model kind
    assert exc.value.code == 1


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "rtpslab.cli", "model", "delivery", "--per", "0",
         "--payloads", "33k", "--no-plot"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "payload_bytes,per" in proc.stdout
