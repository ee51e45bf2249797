"""Command-line surface: end-to-end subcommand runs on a small corpus,
override precedence, exit codes, and deterministic outputs."""

from __future__ import annotations

import json

import pytest

from reactivepp import cli, dataio


def body(path):
    """File lines minus the '#' provenance lines (those carry a timestamp)."""
    return [ln for ln in path.read_text().splitlines()
            if not ln.startswith("#")]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "gen.cfg"
    cfg.write_text("base_rate=2e-3\nevent_lift=0.05\nhorizon_days=3000\n")
    data = root / "data"
    assert cli.main(["synth", "--config", str(cfg), "--entities", "150",
                     "--seed", "1", "--out", str(data)]) == 0
    cf_dir = root / "cf"
    assert cli.main(["cf-fit", "--data", str(data), "--out", str(cf_dir)]) == 0
    abc_dir = root / "abc"
    assert cli.main(["abc-fit", "--data", str(data), "--out", str(abc_dir),
                     "--proposals", "25", "--seed", "2",
                     "--base-rate", "2e-3", "--event-lift", "0.05"]) == 0
    return {"root": root, "cfg": cfg, "data": data,
            "cf": cf_dir, "abc": abc_dir}


def test_synth_outputs(workspace):
    data = workspace["data"]
    for name in ("events.csv", "inspections.csv", "covariates.csv",
                 "ground_truth.json"):
        assert (data / name).exists()
    truth = json.loads((data / "ground_truth.json").read_text())
    assert truth["base_rate"] == 2e-3
    assert truth["n_entities"] == 150
    assert len(body(data / "covariates.csv")) == 151  # header + entities


def test_flag_overrides_config(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("entities=10\nhorizon_days=200\n")
    out = tmp_path / "corpus"
    assert cli.main(["synth", "--config", str(cfg), "--entities", "20",
                     "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "resolved entities=20" in printed
    assert len(body(out / "covariates.csv")) == 21


def test_config_used_when_no_flag(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("entities=10\nhorizon_days=200\nseed=9\n")
    out = tmp_path / "corpus"
    assert cli.main(["synth", "--config", str(cfg), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "resolved entities=10" in printed
    assert "resolved seed=9" in printed


def test_ingest_check_positional_and_flag(workspace, capsys):
    data = str(workspace["data"])
    out = workspace["root"] / "check"
    assert cli.main(["ingest-check", data, "--out", str(out)]) == 0
    first = capsys.readouterr().out
    assert "entities=150" in first
    assert "rejected=0" in first
    assert (out / "rejected.csv").exists()
    assert cli.main(["ingest-check", "--data", data, "--out", str(out)]) == 0
    assert "entities=150" in capsys.readouterr().out


def test_cf_fit_artifact(workspace):
    cf_dir = workspace["cf"]
    art = dataio.load_artifact(cf_dir / "model.json")
    assert art.method == "cf"
    assert art.bounds is not None and art.bounds.shape == (2, 3)
    assert art.params.base_rate > 0
    for key in ("excitation_amplitude", "excitation_decay", "event_lift_raw",
                "n_trails", "t_end", "fit_flag", "constant_columns"):
        assert key in art.statistics
    curve = body(cf_dir / "cf_curve.csv")
    assert curve[0] == "day,p_hat,n,n_events"
    assert len(curve) == 1 + 365


def test_abc_fit_artifact(workspace):
    abc_dir = workspace["abc"]
    art = dataio.load_artifact(abc_dir / "model.json")
    assert art.method == "abc"
    assert art.statistics["n_proposals"] == 25
    manifold = json.loads((abc_dir / "manifold.json").read_text())
    assert len(manifold["coefficients"]) == 6
    assert manifold["closest_point"] == art.statistics["upsilon"]
    kern = art.params.kernel
    assert list(map(float, kern.excitation_coeffs)) == art.statistics["upsilon"]
    proposals = body(abc_dir / "proposals.csv")
    assert proposals[0] == "upsilon1,upsilon2,upsilon3,dne,kl"
    assert len(proposals) == 1 + 25


def test_simulate_deterministic(workspace):
    data, cf_dir, root = (str(workspace["data"]), workspace["cf"],
                          workspace["root"])
    outs = []
    for name in ("sim1", "sim2"):
        out = root / name
        assert cli.main(["simulate", "--data", data,
                         "--model", str(cf_dir / "model.json"),
                         "--t-end", "1000", "--seed", "5",
                         "--out", str(out)]) == 0
        outs.append(body(out / "sim_events.csv"))
    assert outs[0] == outs[1]
    assert outs[0][0] == "entity_id,day"
    assert len(outs[0]) > 1


def test_policy_then_cost(workspace, capsys):
    data, cf_dir, root = (str(workspace["data"]), workspace["cf"],
                          workspace["root"])
    out = root / "policy"
    assert cli.main(["policy", "--data", data,
                     "--model", str(cf_dir / "model.json"),
                     "--Y", "1,2", "--horizon-years", "2",
                     "--replicates", "2", "--adhoc-per-day", "0",
                     "--seed", "3", "--cost-event", "100",
                     "--cost-inspection", "10", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "optimal cycle:" in printed
    summary = json.loads((out / "policy_summary.json").read_text())
    assert summary["horizon_years"] == 2
    assert summary["n_entities"] == 150
    assert [c["cycle_years"] for c in summary["cycles"]] == [1, 2]
    # with no ad hoc visits the counts are exactly one per entity per cycle
    assert summary["cycles"][0]["inspections_total"] == 300
    assert summary["cycles"][1]["inspections_total"] == 150
    assert (out / "policy_report.csv").exists()
    assert (out / "cost.csv").exists()

    cost_out = root / "cost"
    assert cli.main(["cost", "--summary", str(out / "policy_summary.json"),
                     "--cost-event", "100", "--cost-inspection", "10",
                     "--out", str(cost_out)]) == 0
    assert "optimal cycle:" in capsys.readouterr().out
    assert body(cost_out / "cost.csv") == body(out / "cost.csv")


def test_rank_compares_artifacts(workspace, capsys):
    data, root = str(workspace["data"]), workspace["root"]
    out = root / "rank"
    assert cli.main(["rank", "--data", data,
                     "--model-a", str(workspace["cf"] / "model.json"),
                     "--model-b", str(workspace["abc"] / "model.json"),
                     "--window-start", "2500", "--window-end", "2900",
                     "--out", str(out)]) == 0
    assert "wins_a=" in capsys.readouterr().out
    summary = json.loads((out / "rank_summary.json").read_text())
    rows = body(out / "rank_rows.csv")
    assert rows[0] == "event_time,entity,rank_a,rank_b"
    n_rows = len(rows) - 1
    assert summary["wins_a"] + summary["wins_b"] + summary["ties"] == n_rows
    assert n_rows > 0


def test_exit_codes(tmp_path, capsys):
    # missing required setting
    assert cli.main(["synth", "--out", str(tmp_path / "x")]) == 1
    assert "error:" in capsys.readouterr().err
    # missing config file
    assert cli.main(["synth", "--config", str(tmp_path / "nope.cfg"),
                     "--entities", "5", "--out", str(tmp_path / "x")]) == 1
    # missing corpus directory
    assert cli.main(["ingest-check", str(tmp_path / "ghost")]) == 1
    # missing model artifact
    assert cli.main(["simulate", "--data", str(tmp_path / "ghost"),
                     "--model", str(tmp_path / "ghost.json"),
                     "--t-end", "10", "--out", str(tmp_path / "x")]) == 1
    # missing policy summary
    assert cli.main(["cost", "--summary", str(tmp_path / "ghost.json"),
                     "--cost-event", "1", "--cost-inspection", "1",
                     "--out", str(tmp_path / "x")]) == 1
    capsys.readouterr()


def test_malformed_config_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("entities 10\n")
    assert cli.main(["synth", "--config", str(cfg),
                     "--out", str(tmp_path / "x")]) == 1
    assert "key=value" in capsys.readouterr().err


def test_rank_rejects_mismatched_normalization(workspace, tmp_path, capsys):
    blob = json.loads((workspace["cf"] / "model.json").read_text())
    blob["normalization_bounds"] = None
    stripped = tmp_path / "model_b.json"
    stripped.write_text(json.dumps(blob))
    assert cli.main(["rank", "--data", str(workspace["data"]),
                     "--model-a", str(workspace["cf"] / "model.json"),
                     "--model-b", str(stripped),
                     "--window-start", "2500", "--window-end", "2900",
                     "--out", str(tmp_path / "out")]) == 1
    assert "normalization" in capsys.readouterr().err


def test_cf_fit_rerun_byte_identical(workspace):
    data, root = str(workspace["data"]), workspace["root"]
    again = root / "cf2"
    assert cli.main(["cf-fit", "--data", data, "--out", str(again)]) == 0
    assert ((again / "model.json").read_bytes()
            == (workspace["cf"] / "model.json").read_bytes())
    assert body(again / "cf_curve.csv") == body(workspace["cf"] / "cf_curve.csv")


def test_synth_rerun_byte_identical(workspace):
    root, cfg = workspace["root"], workspace["cfg"]
    again = root / "data2"
    assert cli.main(["synth", "--config", str(cfg), "--entities", "150",
                     "--seed", "1", "--out", str(again)]) == 0
    for name in ("events.csv", "inspections.csv", "covariates.csv"):
        assert body(again / name) == body(workspace["data"] / name)
    assert ((again / "ground_truth.json").read_bytes()
            == (workspace["data"] / "ground_truth.json").read_bytes())
