"""End-to-end command-line behavior: JSON envelopes, exit codes, files."""

import json
import os

import numpy as np
import pytest

from powcorr import NumericalError
from powcorr.cli import main
from powcorr.hpgen import load_sample
from powcorr import probe


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def payload_of(stdout: str) -> dict:
    return json.loads(stdout)


def test_gen_writes_the_canonical_small_sample(tmp_path, capsys):
    path = tmp_path / "sample.txt"
    code, out, err = run(capsys, "gen", "--x", "3/2", "--N", "3",
                         "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[1:] == ["0.5", "0.25", "0.375"]
    back = load_sample(path)
    assert back.n_max == 3
    payload = payload_of(out)
    assert payload["schema"] == 1
    assert payload["command"] == "gen"
    assert payload["config"]["x"] == "3/2"


def test_gen_requires_out(capsys):
    code, _, err = run(capsys, "gen", "--x", "3/2", "--N", "3")
    assert code == 2
    assert "out" in err


def test_envelope_embeds_resolved_config(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("A = 1.02\nn_values = 2000  # one size\ns_grid = 0.5,1\n"
                   "samples = 3\n")
    code, out, _ = run(capsys, "paircorr", "--config", str(cfg),
                       "--samples", "4")
    assert code == 0
    payload = payload_of(out)
    # flag wins over file, file wins over default
    assert payload["config"]["samples"] == 4
    assert payload["config"]["A"] == "1.02"
    assert payload["config"]["n_values"] == [2000]
    assert len(payload["results"]["rows"]) == 4 * 1 * 2


def test_unknown_config_key_is_a_usage_error(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("frobnicate = 7\n")
    code, _, err = run(capsys, "paircorr", "--config", str(cfg))
    assert code == 2
    assert "frobnicate" in err


def test_bad_rational_is_a_usage_error(capsys):
    code, _, err = run(capsys, "gen", "--x", "1/3", "--N", "5",
                       "--out", "/tmp/never.txt")
    assert code == 2


def test_json_and_csv_written_next_to_each_other(tmp_path, capsys):
    prefix = tmp_path / "report"
    code, out, _ = run(capsys, "paircorr", "--control", "uniform",
                       "--N", "500", "--s", "1", "--samples", "2",
                       "--out", str(prefix))
    assert code == 0
    assert out == ""  # report went to the file, stdout stays clean
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["schema"] == 1
    csv_lines = (tmp_path / "report.csv").read_text().splitlines()
    assert csv_lines[0].startswith("sample,")
    assert len(csv_lines) == 1 + 2


def test_nalpha_control_flags_non_poissonian(capsys):
    code, out, err = run(capsys, "paircorr", "--control", "nalpha",
                         "--N", "5000", "--s", "1")
    assert code == 0
    payload = payload_of(out)
    assert payload["results"]["non_poissonian"] is True
    assert payload["results"]["rows"][0]["r2"] == 1.294
    assert "PASS" in err


def test_probe_requires_tenth_power_n(capsys):
    code, _, err = run(capsys, "probe", "y", "--N", "1000")
    assert code == 2
    assert "10th power" in err


def test_probe_partition_emits_the_hand_example(capsys):
    code, out, _ = run(capsys, "probe", "partition", "--A", "3/2",
                       "--N", "1024", "--k", "1")
    assert code == 0
    res = payload_of(out)["results"]
    assert res["atoms"] == 5
    assert res["z"] == ["3/2^1", "2/2^0", "17/2^3", "9/2^2", "19/2^3",
                        "5/2^1"]
    assert res["mus"] == [1, 3, 3, 3, 3]


def test_probe_overlap_below_threshold_maps_to_domain_exit(capsys):
    code, _, err = run(capsys, "probe", "overlap", "--A", "3/2",
                       "--N", "100", "--s", "1", "--n-powers", "8",
                       "--m1", "5", "--m2", "3")
    assert code == 3
    assert "domain error" in err


def test_numerical_certification_failure_maps_to_exit_4(capsys, monkeypatch):
    def explode(*args, **kwargs):
        raise NumericalError("doubling check failed", coarse=1.0, fine=2.0)
    monkeypatch.setattr(probe, "vdc_bound_check", explode)
    code, _, err = run(capsys, "probe", "vdc")
    assert code == 4
    assert "numerical" in err


def test_probe_z_reports_tower_property(capsys):
    code, out, err = run(capsys, "probe", "z", "--A", "3/2", "--N", "1024",
                         "--k", "1")
    assert code == 0
    res = payload_of(out)["results"]
    assert res["tower_ok"] is True
    assert res["tower_rel_gap"] <= 1e-9
    assert "PASS" in err


def test_probe_vdc_rows(capsys):
    code, out, _ = run(capsys, "probe", "vdc", "--l", "1,2",
                       "--n-powers", "2,3", "--m-powers", "1",
                       "--a", "3/2", "--b", "5/2")
    assert code == 0
    rows = payload_of(out)["results"]["rows"]
    assert len(rows) == 4
    assert all(r["within"] for r in rows)


def test_mollifier_check_passes(capsys):
    code, _, err = run(capsys, "mollifier-check", "--N", "10,100,1000",
                       "--s", "1")
    assert code == 0
    assert err.count("PASS") == 6
    assert "FAIL" not in err


def test_fourier_check_reports_honest_slope_failure(capsys):
    code, out, err = run(capsys, "fourier-check", "--N", "10,20,40",
                         "--s", "1")
    assert code == 1
    payload = payload_of(out)
    assert payload["results"]["sup_non_increasing"] is True
    assert payload["results"]["jackson"]["slope"] > 1.15
    assert "FAIL" in err


def test_sweep_needs_ten_samples(capsys):
    code, _, err = run(capsys, "sweep", "--N", "2000", "--samples", "9")
    assert code == 2
    assert "10" in err


def test_sweep_subsequence_mode_requires_twentieth_powers(capsys):
    code, _, err = run(capsys, "sweep", "--N", "5000", "--samples", "10",
                       "--subsequence")
    assert code == 2
    assert "M^20" in err


def test_sweep_gates_on_the_fraction(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("POWCORR_WORKERS", "1")
    prefix = tmp_path / "sw"
    code, _, err = run(capsys, "sweep", "--A", "1.02", "--N", "2000",
                       "--s", "1", "--samples", "10", "--seed", "1",
                       "--out", str(prefix))
    assert code == 0
    payload = json.loads((tmp_path / "sw.json").read_text())
    res = payload["results"]
    assert res["poissonian"] is True
    assert res["partial"] is False
    assert len(res["rows"]) == 10
    # squeeze ratio at N = 2000: 1^20 <= N < 2^20
    assert res["rows"][0]["M"] == 1
    assert res["rows"][0]["squeeze"] == 2.0 ** 20
    assert [r["sample"] for r in res["rows"]] == sorted(
        r["sample"] for r in res["rows"])


def test_sweep_work_cap_yields_partial_report_and_exit_5(tmp_path, capsys,
                                                         monkeypatch):
    monkeypatch.setenv("POWCORR_WORKERS", "1")
    prefix = tmp_path / "cap"
    code, _, err = run(capsys, "sweep", "--A", "1.02", "--N", "2000",
                       "--s", "1", "--samples", "12", "--seed", "1",
                       "--work-cap", "30000000", "--out", str(prefix))
    assert code == 5
    payload = json.loads((tmp_path / "cap.json").read_text())
    res = payload["results"]
    assert res["partial"] is True
    assert 0 < res["samples_run"] < 12
    assert "partial" in err


def test_spacings_and_triple_smoke(tmp_path, capsys):
    code, out, _ = run(capsys, "spacings", "--control", "uniform",
                       "--N", "1500", "--samples", "2")
    assert code == 0
    res = payload_of(out)["results"]
    assert len(res["rows"]) == 2
    assert all(r["sup_exponential"] < 0.1 for r in res["rows"])

    code, out, _ = run(capsys, "triple", "--control", "uniform",
                       "--N", "800", "--s", "1", "--samples", "2")
    assert code == 0
    rows = payload_of(out)["results"]["rows"]
    assert all(abs(r["r3"] / r["poisson_value"] - 1.0) < 0.8 for r in rows)


def test_smoothed_paircorr_reports_both_windows(capsys):
    code, out, _ = run(capsys, "paircorr", "--control", "uniform",
                       "--N", "2000", "--s", "1", "--samples", "1",
                       "--smoothed")
    assert code == 0
    row = payload_of(out)["results"]["rows"][0]
    assert row["r2_inner"] <= row["r2"] + 1e-12
    assert row["r2"] <= row["r2_outer"] + 1e-12
