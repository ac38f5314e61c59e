"""Discrete sampling with gradient surrogates, shared by the sparse generators."""

from __future__ import annotations

import torch


def straight_through_mask(probs: torch.Tensor, rng: torch.Generator | None = None) -> torch.Tensor:
    """Bernoulli sample of probs whose value is exactly 0/1 but whose gradient is d(probs)."""
    u = torch.rand(probs.shape, generator=rng, dtype=probs.dtype)
    hard = (u < probs).to(probs.dtype)
    # grouping matters: probs - probs.detach() is exactly zero in value, so the
    # sampled mask stays bit-exact 0/1 while the gradient of probs passes through
    return hard + (probs - probs.detach())


def concrete_mask(probs: torch.Tensor, temperature: float,
                  rng: torch.Generator | None = None) -> torch.Tensor:
    """Temperature-annealed soft relaxation of the Bernoulli sample (values in (0, 1))."""
    u = torch.rand(probs.shape, generator=rng, dtype=probs.dtype).clamp(1e-6, 1 - 1e-6)
    logistic = torch.log(u) - torch.log1p(-u)
    logits = torch.log(probs.clamp_min(1e-8)) - torch.log1p(-probs.clamp_max(1 - 1e-8))
    return torch.sigmoid((logits + logistic) / temperature)
