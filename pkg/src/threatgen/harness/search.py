"""Hyperparameter random search with log-uniform sampling and an append-only registry."""

from __future__ import annotations

import json
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .config import ExperimentConfig
from .runs import run as default_run


@dataclass
class RunRecord:
    run_id: str
    hyperparameters: dict
    final_metrics: dict = field(default_factory=dict)
    checkpoints: list[str] = field(default_factory=list)
    status: str = "ok"
    error: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps({
            "run_id": self.run_id,
            "hyperparameters": self.hyperparameters,
            "final_metrics": self.final_metrics,
            "checkpoints": self.checkpoints,
            "status": self.status,
            "error": self.error,
        }, sort_keys=True)


def log_uniform(rng: np.random.Generator, low: float, high: float) -> float:
    """Sample uniformly in log space; ranges here span orders of magnitude."""
    if low <= 0:
        raise ValueError("log-uniform sampling needs positive bounds")
    if low == high:
        return float(low)
    return float(np.exp(rng.uniform(np.log(low), np.log(high))))


def sample_trial(cfg: ExperimentConfig, rng: np.random.Generator, seed: int) -> ExperimentConfig:
    """One resolved trial configuration.

    AML pins alpha = 1; recsys enforces beta = 1 - alpha exactly.
    """
    updates: dict = {"seed": seed}
    for key, target in (("alpha_range", "alpha"), ("beta_range", "beta"),
                        ("gamma_range", "gamma"), ("learning_rate_range", "learning_rate")):
        if cfg[key] is not None:
            updates[target] = log_uniform(rng, *cfg[key])
    if cfg["use_case"] == "aml":
        updates["alpha"] = 1.0
    elif cfg["use_case"] == "recsys":
        alpha = updates.get("alpha", cfg["alpha"])
        updates["beta"] = 1.0 - alpha
        updates["gamma"] = 0.0
    return cfg.replace(**updates)


def random_search(cfg: ExperimentConfig, n_trials: int, out_dir,
                  run_fn: Callable[[ExperimentConfig, Path], dict] | None = None) -> list[RunRecord]:
    """Run n_trials independently sampled trials; crashes are recorded, not fatal."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    run_fn = run_fn or default_run
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(cfg["seed"])
    registry = out_dir / "runs.jsonl"

    records: list[RunRecord] = []
    for i in range(n_trials):
        trial = sample_trial(cfg, rng, seed=cfg["seed"] + 1 + i)
        run_id = f"trial-{i:03d}"
        trial_dir = out_dir / run_id
        hp = {k: trial[k] for k in ("alpha", "beta", "gamma", "learning_rate", "seed")}
        try:
            metrics = run_fn(trial, trial_dir)
            checkpoints = sorted(str(p.relative_to(out_dir)) for p in trial_dir.glob("*.pt"))
            rec = RunRecord(run_id, hp, metrics, checkpoints)
        except Exception as exc:  # noqa: BLE001 - a failed trial must not kill the search
            rec = RunRecord(run_id, hp, status="failed",
                            error=f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}")
        records.append(rec)
        with open(registry, "a") as fh:
            fh.write(rec.to_json() + "\n")
    return records
