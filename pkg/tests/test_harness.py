import json

import numpy as np
import pytest
import yaml
from click.testing import CliRunner

from threatgen.harness import (
    ConfigError,
    ExperimentConfig,
    RunRecord,
    aml_detection_csv,
    emit_report,
    flow_distribution_csv,
    log_uniform,
    random_search,
    rs_attack_csv,
    run,
    sample_trial,
)
from threatgen.harness.cli import main as cli_main


def test_config_defaults_and_getitem():
    cfg = ExperimentConfig()
    assert cfg["use_case"] == "aml"
    assert cfg["seed"] == 0
    assert cfg.get("missing_key", 42) == 42


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig({"learning_rte": 1e-3})
    assert "learning_rte" in str(exc.value)


def test_config_validates_use_case_and_ranges():
    with pytest.raises(ConfigError):
        ExperimentConfig({"use_case": "forex"})
    with pytest.raises(ConfigError):
        ExperimentConfig({"beta_range": [10.0, 1.0]})
    with pytest.raises(ConfigError):
        ExperimentConfig({"beta_range": [1.0]})
    ExperimentConfig({"beta_range": [1e2, 1e5]})


def test_config_replace_returns_new_validated_config():
    cfg = ExperimentConfig()
    other = cfg.replace(seed=7)
    assert other["seed"] == 7
    assert cfg["seed"] == 0
    with pytest.raises(ConfigError):
        cfg.replace(nonsense=1)


def test_config_digest_tracks_values():
    a = ExperimentConfig({"seed": 1})
    b = ExperimentConfig({"seed": 1})
    c = ExperimentConfig({"seed": 2})
    assert a.digest == b.digest
    assert a.digest != c.digest


def test_config_file_roundtrip(tmp_path):
    cfg = ExperimentConfig({"use_case": "recsys", "seed": 3, "alpha": 0.25})
    path = tmp_path / "cfg.yaml"
    cfg.save(path)
    loaded = ExperimentConfig.from_file(path)
    assert loaded.values == cfg.values
    path.write_text("- not\n- a\n- mapping\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(path)


def test_log_uniform_bounds_and_degenerate_range():
    rng = np.random.default_rng(0)
    draws = [log_uniform(rng, 1e2, 1e5) for _ in range(200)]
    assert min(draws) >= 1e2 and max(draws) <= 1e5
    # log-uniform: roughly a third of the mass per decade
    below_1e3 = sum(d < 1e3 for d in draws) / len(draws)
    assert 0.15 <= below_1e3 <= 0.55
    assert log_uniform(rng, 5.0, 5.0) == 5.0
    with pytest.raises(ValueError):
        log_uniform(rng, 0.0, 1.0)


def test_sample_trial_pins_alpha_for_aml():
    cfg = ExperimentConfig({"use_case": "aml", "beta_range": [1e2, 1e5],
                            "gamma_range": [1e3, 4e3], "learning_rate_range": [1e-4, 3e-3]})
    rng = np.random.default_rng(1)
    for i in range(10):
        trial = sample_trial(cfg, rng, seed=i)
        assert trial["alpha"] == 1.0
        assert 1e2 <= trial["beta"] <= 1e5
        assert 1e3 <= trial["gamma"] <= 4e3
        assert 1e-4 <= trial["learning_rate"] <= 3e-3
        assert trial["seed"] == i


def test_sample_trial_couples_recsys_weights():
    cfg = ExperimentConfig({"use_case": "recsys", "alpha_range": [1e-5, 1.0],
                            "learning_rate_range": [1e-5, 3e-4]})
    rng = np.random.default_rng(2)
    for i in range(10):
        trial = sample_trial(cfg, rng, seed=i)
        assert trial["beta"] == 1.0 - trial["alpha"]
        assert trial["gamma"] == 0.0


def test_random_search_registry_is_append_only(tmp_path):
    calls = []

    def fake_run(trial, out_dir):
        calls.append(trial["seed"])
        if len(calls) == 2:
            raise RuntimeError("boom")
        return {"final_loss_total": float(len(calls))}

    cfg = ExperimentConfig({"use_case": "aml", "beta_range": [1e2, 1e5]})
    records = random_search(cfg, 3, tmp_path, run_fn=fake_run)
    assert [r.status for r in records] == ["ok", "failed", "ok"]
    assert "RuntimeError: boom" in records[1].error
    assert calls == [1, 2, 3]  # seeds are cfg.seed + 1 + trial index

    random_search(cfg, 2, tmp_path, run_fn=fake_run)
    lines = (tmp_path / "runs.jsonl").read_text().strip().splitlines()
    assert len(lines) == 5
    first = json.loads(lines[0])
    assert first["run_id"] == "trial-000"
    assert set(first["hyperparameters"]) == {"alpha", "beta", "gamma", "learning_rate", "seed"}
    with pytest.raises(ValueError):
        random_search(cfg, 0, tmp_path, run_fn=fake_run)


def test_run_record_json_shape():
    rec = RunRecord("trial-000", {"alpha": 1.0})
    data = json.loads(rec.to_json())
    assert data["status"] == "ok"
    assert data["error"] is None


DETECTION_REPORT = {
    "rules": {"alert_rate": 0.014, "recall": 0.3, "precision": 0.9},
    "model": {"alert_rate": 0.014, "recall": 0.5, "precision": 0.95},
    "rules+model": {"alert_rate": 0.02, "recall": 0.6, "precision": 0.92},
}


def test_aml_detection_csv_golden():
    assert aml_detection_csv(DETECTION_REPORT) == (
        "scenario,alert_rate,recall,precision\n"
        "Rules,0.014,0.3,0.9\n"
        "Model,0.014,0.5,0.95\n"
        "Rules+Model,0.02,0.6,0.92\n"
    )


def test_rs_attack_csv_golden():
    counts = {
        "trained_generator": {30: 120, 60: 200},
        "baseline_1": {30: 0, 60: 1},
    }
    assert rs_attack_csv(counts, (30, 60)) == (
        "generation_strategy,30_users,60_users\n"
        "trained_generator,120,200\n"
        "baseline_1,0,1\n"
    )


def test_flow_distribution_csv_schema():
    real = np.array([[10.0, 0.0], [4.0, 4.0]])
    gen = np.array([[0.0, 0.0]])
    text = flow_distribution_csv(real, gen)
    lines = text.strip().splitlines()
    assert lines[0] == "source,total_flow,mean_amount,n_transactions"
    assert lines[1] == "real,10.0,10.0,1"
    assert lines[2] == "real,8.0,4.0,2"
    assert lines[3] == "generated,0.0,0.0,0"


def test_emit_report_writes_named_files(tmp_path):
    path = emit_report(DETECTION_REPORT, "aml_detection", tmp_path)
    assert path.name == "aml_detection.csv"
    assert path.read_text() == aml_detection_csv(DETECTION_REPORT)
    with pytest.raises(ValueError):
        emit_report(DETECTION_REPORT, "confusion_matrix", tmp_path)
    with pytest.raises(ValueError):
        emit_report({}, "aml_detection", tmp_path)


SMALL_AML = {
    "use_case": "aml", "n_accounts": 36, "n_internal": 3, "n_external": 4,
    "n_windows": 16, "epochs": 1, "batch_size": 4, "critic_steps": 2,
    "learning_rate": 1e-4, "beta": 100.0, "gamma": 10.0, "objective_scale": 100.0,
}

SMALL_RS = {
    "use_case": "recsys", "n_users": 30, "n_items": 1000, "group_size": 4,
    "epochs": 1, "cycles_per_epoch": 1, "batch_size": 4, "critic_steps": 1,
    "learning_rate": 1e-4, "alpha": 0.5, "beta": 0.5, "gamma": 0.0,
}


def test_run_aml_writes_artifacts(tmp_path):
    result = run(ExperimentConfig(SMALL_AML), tmp_path)
    for name in ("metrics.jsonl", "generator.pt", "discriminator.pt", "config.yaml", "result.json"):
        assert (tmp_path / name).exists()
    assert "final_loss_total" in result
    saved = yaml.safe_load((tmp_path / "config.yaml").read_text())
    assert saved["n_accounts"] == 36


def test_run_recsys_writes_artifacts_and_target(tmp_path):
    result = run(ExperimentConfig(SMALL_RS), tmp_path)
    assert (tmp_path / "generator.pt").exists()
    assert 0 <= result["target_item"] < 1000


def test_run_theory_outputs_and_determinism(tmp_path):
    cfg = ExperimentConfig({"use_case": "theory", "alpha": 0.5, "steps": 3000})
    a = run(cfg, tmp_path / "a")
    b = run(cfg, tmp_path / "b")
    assert a == b
    assert a["fixed_point"] == pytest.approx(4.0)
    assert a["converged"]
    for name in ("trajectory.csv", "phase_portrait.csv", "fixed_points.csv"):
        assert (tmp_path / "a" / name).read_text() == (tmp_path / "b" / name).read_text()


def test_cli_theory_sim_prints_fixed_point(tmp_path):
    runner = CliRunner()
    result = runner.invoke(cli_main, ["--out", str(tmp_path), "theory-sim",
                                      "--alpha", "0.5", "--k", "4", "--steps", "3000"])
    assert result.exit_code == 0, result.output
    assert "fixed point: 4" in result.output


def test_cli_hpsearch_rejects_zero_trials(tmp_path):
    runner = CliRunner()
    result = runner.invoke(cli_main, ["--out", str(tmp_path), "hpsearch", "--trials", "0"])
    assert result.exit_code != 0
    assert "--trials" in result.output


def test_cli_train_aml_and_detect_eval(tmp_path):
    runner = CliRunner()
    cfg_path = tmp_path / "cfg.yaml"
    ExperimentConfig(SMALL_AML).save(cfg_path)
    out = tmp_path / "out"
    result = runner.invoke(cli_main, ["--config", str(cfg_path), "--out", str(out), "train-aml"])
    assert result.exit_code == 0, result.output
    result = runner.invoke(cli_main, [
        "--config", str(cfg_path), "--out", str(out), "detect-eval",
        "--generator", str(out / "generator.pt"),
        "--discriminator", str(out / "discriminator.pt"),
    ])
    assert result.exit_code == 0, result.output
    text = (out / "aml_detection.csv").read_text()
    assert text.splitlines()[0] == "scenario,alert_rate,recall,precision"
    assert text.count("\n") == 4


def test_cli_train_recsys_and_attack_eval(tmp_path):
    runner = CliRunner()
    cfg_path = tmp_path / "cfg.yaml"
    ExperimentConfig(SMALL_RS).save(cfg_path)
    out = tmp_path / "out"
    result = runner.invoke(cli_main, ["--config", str(cfg_path), "--out", str(out),
                                      "train-recsys"])
    assert result.exit_code == 0, result.output
    result = runner.invoke(cli_main, [
        "--config", str(cfg_path), "--out", str(out), "attack-eval",
        "--generator", str(out / "generator.pt"),
        "--inject", "2", "--inject", "4",
    ])
    assert result.exit_code == 0, result.output
    lines = (out / "rs_attack.csv").read_text().strip().splitlines()
    assert lines[0] == "generation_strategy,2_users,4_users"
    strategies = [line.split(",")[0] for line in lines[1:]]
    assert strategies == ["trained_generator", "baseline_1", "baseline_2",
                         "baseline_3", "baseline_4"]


def test_cli_report_roundtrips_attack_table(tmp_path):
    counts = {"trained_generator": {30: 5}, "baseline_1": {30: 0}}
    src = tmp_path / "counts.json"
    src.write_text(json.dumps(counts))
    runner = CliRunner()
    result = runner.invoke(cli_main, ["--out", str(tmp_path), "report",
                                      "--kind", "rs_attack", "--input", str(src)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "rs_attack.csv").read_text() == rs_attack_csv(counts, (30,))
