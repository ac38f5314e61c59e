"""Loss composition for the three-term generator objective and the Wasserstein critic."""

from __future__ import annotations

from dataclasses import dataclass

import torch


class NonFiniteLossError(ValueError):
    """A loss term left the finite range; carries the name of the offending term."""

    def __init__(self, term: str, value):
        self.term = term
        super().__init__(f"non-finite value in loss term '{term}': {value}")


@dataclass(frozen=True)
class LossWeights:
    """Mixture weights for the generator loss: alpha * objective + beta * gan + gamma * alert."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.gamma < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.alpha == 0 and self.beta == 0 and self.gamma == 0:
            raise ValueError("at least one loss weight must be strictly positive")


def _check_finite(name: str, value):
    if isinstance(value, torch.Tensor):
        if not bool(torch.isfinite(value).all()):
            raise NonFiniteLossError(name, value)
    else:
        if not torch.isfinite(torch.as_tensor(float(value))):
            raise NonFiniteLossError(name, value)


def combined_generator_loss(obj, gan, alert, w: LossWeights):
    """alpha*obj + beta*gan + gamma*alert, skipping terms whose weight is exactly 0.

    Skipping zero-weight terms keeps the degenerate cases bit-exact: with
    weights (0, 1, 0) the result *is* the GAN term, so a generator step taken
    through this function is identical to a plain Wasserstein generator step.
    Works on floats and on scalar tensors (autograd flows through).
    """
    terms = []
    for name, weight, value in (("objective", w.alpha, obj), ("gan", w.beta, gan), ("alert", w.gamma, alert)):
        if weight == 0:
            continue
        if value is None:
            raise ValueError(f"loss term '{name}' has weight {weight} but no value was supplied")
        _check_finite(name, value)
        terms.append(value if weight == 1 else weight * value)
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total


def critic_loss(real_scores, fake_scores, penalty=0.0, coeff: float = 0.0):
    """Wasserstein critic loss: mean(fake) - mean(real) + coeff * penalty."""
    real_scores = torch.as_tensor(real_scores)
    fake_scores = torch.as_tensor(fake_scores)
    if real_scores.numel() == 0 or fake_scores.numel() == 0:
        raise ValueError("score vectors must be non-empty")
    loss = fake_scores.mean() - real_scores.mean()
    if coeff != 0:
        loss = loss + coeff * penalty
    return loss


def generator_gan_loss(fake_scores):
    """Generator side of the Wasserstein game: -mean(fake scores)."""
    fake_scores = torch.as_tensor(fake_scores)
    if fake_scores.numel() == 0:
        raise ValueError("score vector must be non-empty")
    return -fake_scores.mean()


def gradient_penalty(real_batch: torch.Tensor, fake_batch: torch.Tensor, discriminator,
                     rng: torch.Generator | None = None) -> torch.Tensor:
    """Mean over interpolates of (||grad_x D(x)||_2 - 1)^2.

    Interpolates are sampled uniformly on the segment between paired real and
    fake samples; the critic is differentiated with respect to its input.
    """
    if real_batch.shape != fake_batch.shape:
        raise ValueError(f"batch shapes differ: {tuple(real_batch.shape)} vs {tuple(fake_batch.shape)}")
    n = real_batch.shape[0]
    eps_shape = (n,) + (1,) * (real_batch.dim() - 1)
    eps = torch.rand(eps_shape, generator=rng, dtype=real_batch.dtype)
    mixed = (eps * real_batch + (1.0 - eps) * fake_batch).detach().requires_grad_(True)
    scores = discriminator(mixed)
    grads = torch.autograd.grad(
        outputs=scores,
        inputs=mixed,
        grad_outputs=torch.ones_like(scores),
        create_graph=True,
    )[0]
    norms = grads.reshape(n, -1).norm(2, dim=1)
    return ((norms - 1.0) ** 2).mean()
