"""Flat experiment configuration with a closed key set (typos are errors)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import yaml

from ..core.train import config_digest

USE_CASES = ("aml", "recsys", "theory")

# Every key a config file may set, with its default.  Ranges are [low, high]
# pairs consumed by the random search; fixed values are used directly.
DEFAULTS: dict[str, Any] = {
    "use_case": "aml",
    "seed": 0,
    "out_dir": "runs",
    # loss weights (fixed or ranged)
    "alpha": 1.0,
    "beta": 1.0,
    "gamma": 0.0,
    "alpha_range": None,
    "beta_range": None,
    "gamma_range": None,
    # optimizer / loop
    "learning_rate": 1e-3,
    "learning_rate_range": None,
    "epochs": 5,
    "batch_size": 32,
    "critic_steps": 5,
    "gradient_penalty_coefficient": 10.0,
    # hyperparameter search
    "n_trials": 20,
    # aml geometry and data
    "n_internal": 5,
    "n_external": 10,
    "n_windows": 64,
    "n_accounts": 500,
    "objective_scale": 1000.0,
    # recsys data and recommender
    "ratings_file": None,
    "n_users": 600,
    # a tenth of the items must cover the 90-filler baselines, so >= ~910
    "n_items": 1000,
    "group_size": 60,
    "target_item": None,
    "neighbor_count": 400,
    "top_n": 10,
    "cycles_per_epoch": 10,
    # theory
    "mu_d": 0.0,
    "sigma_d": 1.0,
    "sigma_g": 1.0,
    "eta": 0.05,
    "start_mu_g": None,
    "steps": 5000,
    "tolerance": 1e-3,
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    values: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.values) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(DEFAULTS)
        merged.update(self.values)
        if merged["use_case"] not in USE_CASES:
            raise ConfigError(f"use_case must be one of {USE_CASES}")
        for key in ("alpha_range", "beta_range", "gamma_range", "learning_rate_range"):
            rng = merged[key]
            if rng is not None:
                if len(rng) != 2 or rng[0] > rng[1]:
                    raise ConfigError(f"{key} must be [low, high] with low <= high")
        self.values = merged

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def replace(self, **updates) -> "ExperimentConfig":
        merged = dict(self.values)
        merged.update(updates)
        return ExperimentConfig(merged)

    @property
    def digest(self) -> str:
        return config_digest(self.values)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a flat mapping")
        return cls(data)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            yaml.safe_dump(self.values, fh, sort_keys=True)
