"""Glue that wires the AML components into the generic adversarial trainer."""

from __future__ import annotations

from dataclasses import dataclass

import torch

from ..core.losses import LossWeights
from ..core.train import ComponentBundle, TrainConfig, TrainedPair, train
from .models import AmlDiscriminator, AmlGenerator, mule_objective
from .rules import RuleConfig, rules_proxy


@dataclass(frozen=True)
class AmlGeometry:
    n_internal: int = 5
    n_external: int = 10
    n_windows: int = 64
    noise_dim: int = 100


def build_aml_bundle(geometry: AmlGeometry, rule_cfg: RuleConfig | None, seed: int,
                     objective_eps: float = 1e-6, generator_kwargs: dict | None = None,
                     objective_scale: float = 1.0) -> ComponentBundle:
    """Freshly initialized generator/discriminator pair with the mule objective.

    `objective_scale` divides the raw throughput so the objective has a
    magnitude comparable to the GAN term at the default weights.
    Passing rule_cfg=None omits the alert term (gamma must then be 0).
    """
    torch.manual_seed(seed)
    gen = AmlGenerator(noise_dim=geometry.noise_dim, n_internal=geometry.n_internal,
                       n_external=geometry.n_external, n_windows=geometry.n_windows,
                       **(generator_kwargs or {}))
    gen.set_sample_seed(seed + 1)
    disc = AmlDiscriminator(n_internal=geometry.n_internal, n_external=geometry.n_external,
                            n_windows=geometry.n_windows)

    def objective(batch: torch.Tensor) -> torch.Tensor:
        return mule_objective(batch, eps=objective_eps) / objective_scale

    alert = None
    if rule_cfg is not None:
        def alert(batch: torch.Tensor) -> torch.Tensor:
            # feed the generator's transaction probabilities to the count rule;
            # inferring activity from near-zero masked amounts is uninformative
            probs = gen.last_probs
            counts = probs if probs is not None and probs.shape == batch.shape else None
            return rules_proxy(batch, rule_cfg, counts=counts)

    return ComponentBundle(generator=gen, discriminator=disc, malicious_objective=objective,
                           noise_dim=geometry.noise_dim, alert_system=alert)


def train_aml(data: torch.Tensor, weights: LossWeights, cfg: TrainConfig,
              geometry: AmlGeometry = AmlGeometry(), rule_cfg: RuleConfig | None = None,
              objective_scale: float = 1.0, generator_kwargs: dict | None = None) -> TrainedPair:
    bundle = build_aml_bundle(geometry, rule_cfg if weights.gamma > 0 else None, cfg.seed,
                              objective_scale=objective_scale, generator_kwargs=generator_kwargs)
    return train(bundle, data, weights, cfg)
