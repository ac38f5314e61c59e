"""Adversarial training of the group attack generator against the recommender.

The alternation, optimizer, and metric log match the generic engine; the loop
is specialized because real samples are single profiles while the generator
emits whole groups, and the malicious objective needs the ratings matrix.
No existing detection system exists in this use case, so gamma is always 0.
"""

from __future__ import annotations

import torch

from ..core.losses import LossWeights, combined_generator_loss, critic_loss, gradient_penalty
from ..core.metrics import evaluate_discriminator
from ..core.train import ADAM_BETAS, EpochRecord, NoiseBatch, TrainConfig, TrainedPair, TrainingDiverged
from .cf import _as_tensor, predict_for_users
from .models import RsDiscriminator, RsGenerator, injection_objective


def group_injection_objective(R: torch.Tensor, profiles: torch.Tensor, target_item: int,
                              normalize: bool = True) -> torch.Tensor:
    """Injection objective after adding one generated group to the ratings matrix.

    Predictions use the training-mode weighted average over all users (no
    neighborhood cutoff), so the gradient reaches every generated profile.
    `normalize` divides by users*items to keep the magnitude scale-free.
    """
    n_real = R.shape[0]
    R_all = torch.cat([R, profiles.reshape(-1, R.shape[1])])
    P = predict_for_users(R_all, torch.arange(n_real), k="all")
    obj = injection_objective(P, target_item)
    if normalize:
        obj = obj / (P.shape[0] * P.shape[1])
    return obj


def train_recsys(R, weights: LossWeights, cfg: TrainConfig, target_item: int,
                 group_size: int = 300, noise_dim: int = 128,
                 cycles_per_epoch: int = 10, holdout_fraction: float = 0.1) -> TrainedPair:
    """Alternating critic/generator training of the profile generator.

    Each cycle runs cfg.critic_steps_per_generator_step critic updates (single
    profiles, real rows vs. generated rows) followed by one generator update on
    the combined objective + GAN loss.  Deterministic given cfg.seed.
    """
    if weights.gamma != 0:
        raise ValueError("the recommender use case has no alert system; gamma must be 0")
    R = _as_tensor(R).to(torch.float32)
    n_items = R.shape[1]

    torch.manual_seed(cfg.seed)
    gen = RsGenerator(n_items=n_items, group_size=group_size, noise_dim=noise_dim)
    gen.set_sample_seed(cfg.seed + 1)
    disc = RsDiscriminator(n_items=n_items)

    rng = torch.Generator().manual_seed(cfg.seed + 2)
    noise_rng = torch.Generator().manual_seed(cfg.seed + 3)
    metric_rng = torch.Generator().manual_seed(cfg.seed + 4)

    n_hold = max(1, int(round(holdout_fraction * R.shape[0])))
    perm = torch.randperm(R.shape[0], generator=rng)
    holdout = R[perm[:n_hold]]
    train_rows = R[perm[n_hold:]]

    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.learning_rate, betas=ADAM_BETAS)
    opt_d = torch.optim.Adam(disc.parameters(), lr=cfg.learning_rate, betas=ADAM_BETAS)

    # the gradient penalty pairs real and fake rows, so the critic batch cannot
    # exceed either the real pool or the rows one generated group provides
    b = min(cfg.batch_size, train_rows.shape[0], group_size)
    records: list[EpochRecord] = []
    for epoch in range(cfg.epochs):
        for _ in range(cycles_per_epoch):
            for _ in range(cfg.critic_steps_per_generator_step):
                opt_d.zero_grad(set_to_none=True)
                rows = train_rows[torch.randperm(train_rows.shape[0], generator=rng)[:b]]
                noise = NoiseBatch.draw(1, noise_dim, generator=noise_rng).values
                fake = gen(noise).reshape(-1, n_items).detach()
                fake = fake[torch.randperm(fake.shape[0], generator=rng)[:b]]
                penalty = (gradient_penalty(rows, fake, disc, rng=rng)
                           if cfg.gradient_penalty_coefficient > 0 else 0.0)
                d_loss = critic_loss(disc(rows), disc(fake), penalty,
                                     cfg.gradient_penalty_coefficient)
                if not torch.isfinite(d_loss):
                    raise TrainingDiverged(epoch, "critic")
                d_loss.backward()
                opt_d.step()

            opt_g.zero_grad(set_to_none=True)
            noise = NoiseBatch.draw(1, noise_dim, generator=noise_rng).values
            profiles = gen(noise)
            obj = (group_injection_objective(train_rows, profiles, target_item)
                   if weights.alpha != 0 else None)
            gan = -disc(profiles).mean() if weights.beta != 0 else None
            total = combined_generator_loss(obj, gan, None, weights)
            if not torch.isfinite(total):
                raise TrainingDiverged(epoch, "generator")
            total.backward()
            opt_g.step()

        with torch.no_grad():
            noise = NoiseBatch.draw(1, noise_dim, generator=metric_rng).values
            profiles = gen(noise)
            obj = float(group_injection_objective(train_rows, profiles, target_item))
            flat = profiles.reshape(-1, n_items)
            gan = float(-disc(flat).mean())
            n_fake = min(holdout.shape[0], flat.shape[0])
            scores = torch.cat([-disc(holdout), -disc(flat[:n_fake])])
            labels = torch.cat([torch.zeros(holdout.shape[0]), torch.ones(n_fake)])
            report = evaluate_discriminator(scores.numpy(), labels.numpy(),
                                            threshold=float(scores.mean()))
        records.append(EpochRecord(
            epoch=epoch,
            loss_obj=obj,
            loss_gan=gan,
            loss_alert=0.0,
            loss_total=weights.alpha * obj + weights.beta * gan,
            disc_accuracy=report["accuracy"],
            disc_auc=report["auc"] if report["auc"] is not None else 0.5,
        ))
    return TrainedPair(gen, disc, records)
