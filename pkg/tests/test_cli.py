"""CLI subcommands: exit codes, file outputs, determinism, figures."""

import json
from pathlib import Path

import numpy as np
import pytest

from gnmverify.cli import main
from gnmverify.qsim import PureState


def honest_config(tmp_path: Path, **overrides) -> Path:
    payload = {
        "group": "klein",
        "subgroup": ["A"],
        "g": "B",
        "m": 2,
        "strategy": {"kind": "honest", "alpha": "B"},
        "sampler": {"kind": "exact-uniform", "seed": 1},
        "noise": None,
        "trials": 20000,
        "seed": 42,
    }
    payload.update(overrides)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(payload))
    return path


def test_group_command_bundled(capsys):
    assert main(["group", "klein"]) == 0
    out = capsys.readouterr().out
    assert "order 4" in out
    assert "S = <A> = {E, A}" in out


def test_group_command_extra_subgroup(capsys):
    assert main(["group", "klein", "--subgroup", "A,B"]) == 0
    out = capsys.readouterr().out
    assert "{E, A, B, AB}" in out


def test_group_command_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["group", str(bad)]) == 2


def test_group_command_not_a_group(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"table": [[0, 1], [1, 1]]}))
    assert main(["group", str(bad)]) == 2


def test_simulate_honest(tmp_path, capsys):
    config = honest_config(tmp_path)
    out_dir = tmp_path / "out"
    assert main(["simulate", "--config", str(config), "--out", str(out_dir)]) == 0
    text = capsys.readouterr().out
    assert "exact acceptance: 0.5000000" in text
    assert (out_dir / "simulate.csv").exists()
    assert (out_dir / "simulate.png").exists()
    assert (out_dir / "manifest.json").exists()
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["group_fingerprint"]


def test_simulate_byte_identical_outputs(tmp_path):
    config = honest_config(tmp_path)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["simulate", "--config", str(config), "--out", str(out1), "--no-plot"]) == 0
    assert main(["simulate", "--config", str(config), "--out", str(out2), "--no-plot"]) == 0
    assert (out1 / "simulate.csv").read_bytes() == (out2 / "simulate.csv").read_bytes()


def test_simulate_records_and_json_format(tmp_path):
    config = honest_config(tmp_path, trials=50)
    out_dir = tmp_path / "out"
    assert main([
        "simulate", "--config", str(config), "--out", str(out_dir),
        "--format", "json", "--records", "--no-plot",
    ]) == 0
    records = json.loads((out_dir / "records.json").read_text())
    assert len(records) == 50
    assert all(rec["accepted"] in (True, False) for rec in records)


def test_simulate_monte_carlo_only(tmp_path, capsys):
    config = honest_config(tmp_path, trials=1000)
    assert main(["simulate", "--config", str(config), "--monte-carlo"]) == 0
    text = capsys.readouterr().out
    assert "exact acceptance" not in text
    assert "monte carlo acceptance" in text


def test_simulate_cap_fallback(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("GNM_DIM_CAP", "8")
    config = honest_config(tmp_path, m=3, trials=500)
    assert main(["simulate", "--config", str(config)]) == 0
    err = capsys.readouterr().err
    assert "falling back to Monte Carlo" in err


def test_simulate_bad_subgroup_name(tmp_path):
    config = honest_config(tmp_path, subgroup="nope")
    assert main(["simulate", "--config", str(config)]) == 2


def test_bounds_command(tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main(["bounds", "--m-min", "2", "--m-max", "30", "--out", str(out_dir)]) == 0
    text = capsys.readouterr().out
    assert "best gap 0.075" in text and "m=14" in text
    rows = (out_dir / "bounds.csv").read_text().splitlines()
    assert rows[0].startswith("m,")
    assert len(rows) == 30  # header + 29 values
    assert (out_dir / "bounds.png").exists()
    assert (out_dir / "gap.csv").exists()


def test_adversary_sweep(tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main([
        "adversary", "--group", "klein", "--generators", "A", "--g", "A",
        "--m-min", "2", "--m-max", "3", "--out", str(out_dir),
    ]) == 0
    text = capsys.readouterr().out
    assert "m=2: optimal cheat 0.5" in text
    state_path = out_dir / "optimal_state_m2.json"
    payload = json.loads(state_path.read_text())
    state = PureState.from_json_dict(payload)
    # serialization round trip is bit exact
    assert json.loads(json.dumps(state.to_json_dict())) == payload
    assert (out_dir / "adversary.csv").exists()
    assert (out_dir / "adversary.png").exists()


def test_adversary_identity_query(capsys):
    assert main(["adversary", "--group", "klein", "--generators", "A", "--g", "E"]) == 0
    assert "optimal cheat 0.0" in capsys.readouterr().out


def test_adversary_nonmember_rejected():
    assert main(["adversary", "--group", "klein", "--generators", "A", "--g", "B"]) == 2


def test_adversary_infeasible_cap(monkeypatch):
    monkeypatch.setenv("GNM_DIM_CAP", "8")
    assert main([
        "adversary", "--group", "klein", "--generators", "A", "--g", "A",
        "--m-min", "3", "--m-max", "3",
    ]) == 3


def test_appendix_command(tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main([
        "appendix", "--n-min", "2", "--n-max", "3", "--samples", "4",
        "--out", str(out_dir), "--seed", "5",
    ]) == 0
    assert "worst |residual|" in capsys.readouterr().out
    lines = (out_dir / "appendix.csv").read_text().splitlines()
    assert len(lines) == 9  # header + 2n * 4 samples
    assert (out_dir / "appendix.png").exists()


def test_reproduce_experiment(tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main(["reproduce-experiment", "--out", str(out_dir)]) == 0
    text = capsys.readouterr().out
    assert "gap scenario S: m=14, gap=0.075" in text
    assert "gap scenario Sprime: m=19, gap=0.207" in text
    cells = (out_dir / "experiment.csv").read_text().splitlines()
    assert len(cells) == 17  # header + 16 cells
    assert (out_dir / "experiment.png").exists()


def test_reproduce_experiment_with_noise(tmp_path):
    out_dir = tmp_path / "out"
    assert main([
        "reproduce-experiment", "--visibility", "0.963", "--fidelity", "0.959",
        "--out", str(out_dir), "--no-plot",
    ]) == 0
    header = (out_dir / "experiment.csv").read_text().splitlines()[0]
    assert "model_probability" in header
    assert not (out_dir / "experiment.png").exists()


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
