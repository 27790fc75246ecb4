import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from polwalk.cli import main
from polwalk.walk import WalkState, evolve, position_distribution


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def test_no_args_is_usage_error(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand_and_flag(capsys):
    assert main(["fly"]) == 2
    assert main(["walk", "--bogus"]) == 2


def test_walk_matches_oracle(tmp_path):
    rc = main(["walk", "--psi", "45", "--init", "0.8:-1:c0, 0.6:1:c0", "--steps", "6", "--out", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "walk_distribution.csv")
    truth = position_distribution(evolve(WalkState.from_terms([(0.8, -1, 0), (0.6, 1, 0)]), 45, 6))
    got = {int(r["position"]): float(r["probability"]) for r in rows}
    assert set(got) == set(range(-7, 8, 2))
    for x, p in got.items():
        assert abs(p - truth.get(x)) < 1e-11
    # 12 significant digits in the file
    assert all(len(r["probability"].replace("0.", "").lstrip("0")) <= 12 for r in rows)


def test_walk_config_echo_round_trip(tmp_path):
    assert main(["walk", "--init", "0.8:-1:c0, 0.6:1:c0", "--steps", "4", "--out", str(tmp_path / "a")]) == 0
    assert main(["walk", "--config", str(tmp_path / "a" / "walk_summary.json"), "--out", str(tmp_path / "b")]) == 0
    for name in ("walk_distribution.csv", "walk_summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_out_env_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("POLWALK_OUT", str(tmp_path))
    assert main(["walk", "--init", "1:0:c0", "--steps", "2"]) == 0
    assert (tmp_path / "walk_distribution.csv").exists()


def test_walk_missing_init_is_usage(tmp_path, capsys):
    assert main(["walk", "--steps", "2", "--out", str(tmp_path)]) == 2
    assert "--init" in capsys.readouterr().err


def test_runtime_error_names_stage(tmp_path, capsys):
    assert main(["walk", "--init", "1:0:c0", "--steps", "2", "--psi", "90", "--out", str(tmp_path)]) == 1
    assert "stage 'walk'" in capsys.readouterr().err


def test_encode_decode(tmp_path):
    assert main(["encode", "--haar", "8", "--delta-theta", "31", "--delta-phi", "57", "--seed", "3",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "encoded.json").read_text())
    assert len(doc["ratios"]) == 7
    assert main(["decode", "--input", str(tmp_path / "encoded.json"), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "decoded_summary.json").read_text())
    assert summary["fidelity"] >= 1 - 1e-9
    assert main(["decode", "--input", str(tmp_path / "encoded.json"), "--convention", "root",
                 "--out", str(tmp_path)]) == 0


def test_encode_explicit_coefficients(tmp_path):
    assert main(["encode", "--coeffs", "0.25,0.25,0.25,0.25,0.25,0.25,0.25,0.25,0.25,0.25,0.25,0.25,0.25,"
                 "0.25,0.25,0.25", "--delta-theta", "22", "--delta-phi", "12", "--out", str(tmp_path)]) == 0
    assert main(["decode", "--input", str(tmp_path / "encoded.json"), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "decoded.csv")
    assert np.allclose([float(r["abs"]) for r in rows], 0.25, atol=1e-9)


def test_decode_bad_file(tmp_path):
    (tmp_path / "bad.json").write_text("{}")
    assert main(["decode", "--input", str(tmp_path / "bad.json"), "--out", str(tmp_path)]) == 2


def test_reconstruct_and_data_file(tmp_path):
    assert main(["reconstruct", "--init", "0.8:-1:c0, 0.6:1:c0", "--steps", "4", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "reconstruction_report.json").read_text())
    assert rep["total_variation"] < 1e-8

    from polwalk.reconstruct import plan_runs, simulate_measurements

    s0 = WalkState.from_terms([(0.8, -1, 0), (0.6, 1, 0)])
    data, _ = simulate_measurements(s0, plan_runs(2, s0))
    (tmp_path / "data.json").write_text(json.dumps(data.to_dict()))
    assert main(["reconstruct", "--init", "0.8:-1:c0, 0.6:1:c0", "--steps", "2", "--data",
                 str(tmp_path / "data.json"), "--out", str(tmp_path / "d")]) == 0
    rep = json.loads((tmp_path / "d" / "reconstruction_report.json").read_text())
    assert rep["total_variation"] < 1e-8


def test_reconstruct_failure_names_stage(tmp_path, capsys):
    (tmp_path / "data.json").write_text(json.dumps({"runs": []}))
    rc = main(["reconstruct", "--init", "0.8:-1:c0, 0.6:1:c0", "--steps", "3", "--data",
               str(tmp_path / "data.json"), "--out", str(tmp_path)])
    assert rc == 1
    assert "failed in stage '" in capsys.readouterr().err


def test_config_schema_violation(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"trials": 0}))
    assert main(["fig6b", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path)]) == 2
    assert "trials" in capsys.readouterr().err
    (tmp_path / "c.json").write_text(json.dumps({"colour": "red"}))
    assert main(["fig6b", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path)]) == 2


def test_figure_config_round_trip(tmp_path):
    assert main(["fig6b", "--trials", "5", "--seed", "9", "--out", str(tmp_path / "a")]) == 0
    summary = tmp_path / "a" / "fig6b_summary.json"
    assert main(["fig6b", "--config", str(summary), "--out", str(tmp_path / "b")]) == 0
    for name in ("fig6b.csv", "fig6b_summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_flags_override_config(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"trials": 4, "seed": 1}))
    assert main(["fig6b", "--config", str(tmp_path / "c.json"), "--trials", "6", "--out", str(tmp_path)]) == 0
    cfg = json.loads((tmp_path / "fig6b_summary.json").read_text())["config"]
    assert cfg["trials"] == 6 and cfg["seed"] == 1


def test_fig6a_small_grid(tmp_path):
    assert main(["fig6a", "--grid", "12", "--trials", "10", "--dim", "8", "--seed", "7",
                 "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "fig6a_summary.json").read_text())
    assert set(summary["summary"]["area"]) == {"relative", "componentwise"}
    assert len(read_csv(tmp_path / "fig6a_relative.csv")) == 144


def test_fig6a_paper_scale_flag(tmp_path, monkeypatch):
    # only check the config binding, not the 1000-trial run itself
    import polwalk.cli as cli

    seen = {}

    def fake_run(config):
        seen["config"] = config
        from polwalk.experiments import ScenarioOutput

        return ScenarioOutput(config, {}, {})

    monkeypatch.setattr(cli, "run_scenario", fake_run)
    assert main(["fig6a", "--paper-scale", "--seed", "7", "--out", str(tmp_path)]) == 0
    assert seen["config"].trials == 1000 and seen["config"].seed == 7 and seen["config"].grid == 36


def test_fig5_and_fig3(tmp_path):
    assert main(["fig5", "--steps", "4", "50", "--alpha-points", "9", "--out", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "fig5.csv")) == 9
    assert main(["fig3", "--steps", "2", "--shots", "0", "--photons", "0", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "fig3_n2.csv")
    assert [float(r["p_theory"]) for r in rows] == pytest.approx([0.16, 0.17, 0.58, 0.09])


def test_budget(tmp_path):
    assert main(["budget", "--reflectivity", "0.5", "--total-loss", "0.7", "--steps", "2",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "budget.json").read_text())
    assert doc["detected_fraction"] == pytest.approx(0.3)
    assert main(["budget", "--reflectivity", "0.99", "--source-rate", "5e6", "--steps", "150",
                 "--target-rate", "1e4", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "budget.json").read_text())
    assert doc["implied_survival_per_two_steps"] == pytest.approx(0.920478678702)
    assert doc["implied_extra_loss"] == pytest.approx(0.0608318756225)


def test_budget_bad_fraction(tmp_path):
    assert main(["budget", "--reflectivity", "1.5", "--out", str(tmp_path)]) == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "polwalk", "budget", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.strip().endswith("budget.json")
