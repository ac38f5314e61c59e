"""Single reproducible experiment runs: data setup, training, artifacts on disk."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from .. import aml, recsys, theory
from ..core.losses import LossWeights
from ..core.train import TrainConfig, save_checkpoint, write_metric_log
from .config import ExperimentConfig


def _train_config(cfg: ExperimentConfig) -> TrainConfig:
    return TrainConfig(
        learning_rate=cfg["learning_rate"],
        critic_steps_per_generator_step=cfg["critic_steps"],
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        gradient_penalty_coefficient=cfg["gradient_penalty_coefficient"],
        seed=cfg["seed"],
    )


def _weights(cfg: ExperimentConfig) -> LossWeights:
    return LossWeights(cfg["alpha"], cfg["beta"], cfg["gamma"])


def run_aml(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Train an AML generator/critic pair on synthetic legitimate data."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(cfg["seed"])
    data_cfg = aml.SynthLegitConfig(
        n_accounts=cfg["n_accounts"],
        accounts_per_sample=cfg["n_internal"],
        n_external=cfg["n_external"],
        n_windows=cfg["n_windows"],
    )
    samples, stats = aml.synth_legit_data(data_cfg, rng)
    data = aml.samples_to_tensor(samples)
    geometry = aml.AmlGeometry(cfg["n_internal"], cfg["n_external"], cfg["n_windows"])
    rule_cfg = aml.RuleConfig()
    pair = aml.train_aml(data, _weights(cfg), _train_config(cfg), geometry,
                         rule_cfg=rule_cfg, objective_scale=cfg["objective_scale"])

    write_metric_log(pair.records, out_dir / "metrics.jsonl")
    save_checkpoint(out_dir / "generator.pt", pair.generator, cfg.digest)
    save_checkpoint(out_dir / "discriminator.pt", pair.discriminator, cfg.digest)
    cfg.save(out_dir / "config.yaml")
    final = pair.records[-1]
    result = {
        "final_loss_total": final.loss_total,
        "final_disc_auc": final.disc_auc,
        "data_stats": stats,
    }
    (out_dir / "result.json").write_text(json.dumps(result, indent=2))
    return result


def load_ratings(cfg: ExperimentConfig) -> np.ndarray:
    if cfg["ratings_file"]:
        R, _ = recsys.load_movielens(cfg["ratings_file"])
        return R
    data_cfg = recsys.SyntheticRatingsConfig(n_users=cfg["n_users"], n_items=cfg["n_items"])
    return recsys.synthetic_ratings(data_cfg, np.random.default_rng(cfg["seed"]))


def resolve_target(cfg: ExperimentConfig, R: np.ndarray) -> int:
    if cfg["target_item"] is not None:
        return int(cfg["target_item"])
    return recsys.pick_target_item(R, np.random.default_rng(cfg["seed"]))


def run_recsys(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Train a profile generator/discriminator pair against the recommender."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    R = load_ratings(cfg)
    target = resolve_target(cfg, R)
    pair = recsys.train_recsys(R, _weights(cfg), _train_config(cfg), target,
                               group_size=cfg["group_size"],
                               cycles_per_epoch=cfg["cycles_per_epoch"])

    write_metric_log(pair.records, out_dir / "metrics.jsonl")
    save_checkpoint(out_dir / "generator.pt", pair.generator, cfg.digest,
                    meta={"target_item": target})
    save_checkpoint(out_dir / "discriminator.pt", pair.discriminator, cfg.digest)
    cfg.save(out_dir / "config.yaml")
    final = pair.records[-1]
    result = {
        "target_item": target,
        "final_loss_total": final.loss_total,
        "final_disc_auc": final.disc_auc,
    }
    (out_dir / "result.json").write_text(json.dumps(result, indent=2))
    return result


def run_theory(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Simulate the toy gradient flow and dump trajectory + phase portrait tables."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = cfg["start_mu_g"] if cfg["start_mu_g"] is not None else cfg["mu_d"]
    params = theory.GaussianToyParams(
        mu_d=cfg["mu_d"], sigma_d=cfg["sigma_d"], mu_g=start,
        sigma_g=cfg["sigma_g"], alpha=cfg["alpha"], eta=cfg["eta"],
    )
    traj = theory.simulate_flow(params, steps=cfg["steps"], tolerance=cfg["tolerance"])
    (out_dir / "trajectory.csv").write_text(traj.to_csv())
    portrait = theory.phase_portrait(
        np.linspace(cfg["mu_d"] - 2, traj.fixed_point_estimate + 2, 25),
        np.linspace(0.0, 0.9, 10),
        params,
    )
    (out_dir / "phase_portrait.csv").write_text(portrait.to_csv())
    (out_dir / "fixed_points.csv").write_text(portrait.fixed_point_csv())
    cfg.save(out_dir / "config.yaml")
    return {
        "fixed_point": traj.fixed_point_estimate,
        "converged": traj.converged,
        "final_mu_g": traj.mu_g_values[-1],
        "steps_taken": traj.times[-1],
    }


def run(cfg: ExperimentConfig, out_dir: Path) -> dict:
    torch.set_num_threads(1)  # keep metric logs bit-reproducible
    return {"aml": run_aml, "recsys": run_recsys, "theory": run_theory}[cfg["use_case"]](cfg, out_dir)
