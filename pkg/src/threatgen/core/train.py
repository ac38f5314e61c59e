"""Alternating critic/generator optimization for the three-term generator loss."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import torch
from torch import nn

from .losses import (
    LossWeights,
    NonFiniteLossError,
    combined_generator_loss,
    critic_loss,
    generator_gan_loss,
    gradient_penalty,
)

CHECKPOINT_VERSION = 1
ADAM_BETAS = (0.5, 0.9)

METRIC_FIELDS = ("epoch", "loss_obj", "loss_gan", "loss_alert", "loss_total",
                 "disc_accuracy", "disc_auc")


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, term: str):
        self.epoch = epoch
        self.term = term
        super().__init__(f"training diverged at epoch {epoch} (term '{term}')")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    critic_steps_per_generator_step: int = 5
    epochs: int = 10
    batch_size: int = 32
    gradient_penalty_coefficient: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.critic_steps_per_generator_step < 1:
            raise ValueError("critic_steps_per_generator_step must be >= 1")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.gradient_penalty_coefficient < 0:
            raise ValueError("gradient_penalty_coefficient must be nonnegative")


@dataclass
class NoiseBatch:
    """A reproducible draw from the standard-normal noise source p(z)."""

    batch_size: int
    dim: int
    values: torch.Tensor
    seed: Optional[int] = None

    @classmethod
    def draw(cls, batch_size: int, dim: int, generator: torch.Generator | None = None,
             seed: int | None = None, dtype=torch.float32) -> "NoiseBatch":
        if batch_size < 1 or dim < 1:
            raise ValueError("batch_size and dim must be positive")
        if seed is not None:
            generator = torch.Generator().manual_seed(seed)
        values = torch.randn((batch_size, dim), generator=generator, dtype=dtype)
        return cls(batch_size, dim, values, seed)


@dataclass
class ComponentBundle:
    """The pieces the trainer composes.

    generator and discriminator are modules; malicious_objective and
    alert_system map a generated batch to a scalar differentiable loss.
    The discriminator may see a restricted view of each sample (it receives
    whatever the generator emits and may ignore parts of it).
    """

    generator: nn.Module
    discriminator: nn.Module
    malicious_objective: Callable[[torch.Tensor], torch.Tensor]
    noise_dim: int
    alert_system: Optional[Callable[[torch.Tensor], torch.Tensor]] = None


@dataclass
class EpochRecord:
    epoch: int
    loss_obj: float
    loss_gan: float
    loss_alert: float
    loss_total: float
    disc_accuracy: float
    disc_auc: float

    def to_json(self) -> str:
        return json.dumps({f: getattr(self, f) for f in METRIC_FIELDS})


@dataclass
class TrainedPair:
    generator: nn.Module
    discriminator: nn.Module
    records: list[EpochRecord] = field(default_factory=list)


def write_metric_log(records: list[EpochRecord], path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_metric_log(path) -> list[EpochRecord]:
    records = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                records.append(EpochRecord(**json.loads(line)))
    return records


def config_digest(obj) -> str:
    """Stable digest of any JSON-serializable config."""
    if hasattr(obj, "__dict__") and not isinstance(obj, dict):
        obj = dict(vars(obj))
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()


def save_checkpoint(path, module: nn.Module, digest: str, meta: dict | None = None) -> None:
    torch.save(
        {
            "version": CHECKPOINT_VERSION,
            "config_digest": digest,
            "state_dict": module.state_dict(),
            "meta": meta or {},
        },
        path,
    )


def load_checkpoint(path, module: nn.Module, expected_digest: str | None = None) -> dict:
    blob = torch.load(path, weights_only=True)
    if blob.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {blob.get('version')}")
    if expected_digest is not None and blob["config_digest"] != expected_digest:
        raise ValueError("checkpoint config digest mismatch")
    module.load_state_dict(blob["state_dict"])
    return blob["meta"]


def generator_step(bundle: ComponentBundle, w: LossWeights, optimizer: torch.optim.Optimizer,
                   noise: torch.Tensor, epoch: int = 0) -> dict:
    """One generator update minimizing the combined loss; returns the term values."""
    optimizer.zero_grad(set_to_none=True)
    fake = bundle.generator(noise)
    obj = bundle.malicious_objective(fake) if w.alpha != 0 else None
    gan = generator_gan_loss(bundle.discriminator(fake)) if w.beta != 0 else None
    alert = None
    if w.gamma != 0:
        if bundle.alert_system is None:
            raise ValueError("gamma > 0 requires an alert system in the bundle")
        alert = bundle.alert_system(fake)
    try:
        total = combined_generator_loss(obj, gan, alert, w)
    except NonFiniteLossError as exc:
        raise TrainingDiverged(epoch, exc.term) from exc
    total.backward()
    optimizer.step()
    def _scalar(x):
        if x is None:
            return 0.0
        return float(x.detach()) if isinstance(x, torch.Tensor) else float(x)

    return {"obj": _scalar(obj), "gan": _scalar(gan), "alert": _scalar(alert),
            "total": _scalar(total)}


def _holdout_metrics(bundle: ComponentBundle, holdout: torch.Tensor, noise_gen: torch.Generator,
                     w: LossWeights) -> EpochRecord:
    """Term values on fresh noise plus discriminator quality on held-out real data."""
    from .metrics import evaluate_discriminator

    with torch.no_grad():
        n = holdout.shape[0]
        noise = NoiseBatch.draw(n, bundle.noise_dim, generator=noise_gen).values
        fake = bundle.generator(noise)
        obj = float(bundle.malicious_objective(fake))
        gan = float(generator_gan_loss(bundle.discriminator(fake)))
        alert = float(bundle.alert_system(fake)) if bundle.alert_system is not None else 0.0
        total = w.alpha * obj + w.beta * gan + w.gamma * alert
        # Positive class = generated; the critic scores real data high, so negate.
        scores = torch.cat([-bundle.discriminator(holdout).reshape(-1),
                            -bundle.discriminator(fake).reshape(-1)])
        labels = torch.cat([torch.zeros(n), torch.ones(n)])
        threshold = float(scores.mean())
        report = evaluate_discriminator(scores.numpy(), labels.numpy(), threshold=threshold)
    return EpochRecord(
        epoch=-1,
        loss_obj=obj,
        loss_gan=gan,
        loss_alert=alert,
        loss_total=total,
        disc_accuracy=report["accuracy"],
        disc_auc=report["auc"] if report["auc"] is not None else 0.5,
    )


def train(bundle: ComponentBundle, data: torch.Tensor, w: LossWeights, cfg: TrainConfig,
          holdout_fraction: float = 0.1) -> TrainedPair:
    """Alternate critic and generator updates over `data` for cfg.epochs epochs.

    Runs single-threaded logic: all randomness flows from cfg.seed through local
    torch.Generators, so two calls with identical inputs produce identical logs.
    """
    if data.shape[0] < cfg.batch_size:
        raise ValueError("data must yield at least one full batch")
    rng = torch.Generator().manual_seed(cfg.seed)
    noise_rng = torch.Generator().manual_seed(cfg.seed + 1)
    metric_rng = torch.Generator().manual_seed(cfg.seed + 2)

    n_hold = max(1, int(round(holdout_fraction * data.shape[0])))
    perm = torch.randperm(data.shape[0], generator=rng)
    holdout = data[perm[:n_hold]]
    train_data = data[perm[n_hold:]]
    if train_data.shape[0] < cfg.batch_size:
        raise ValueError("not enough data left after the holdout split for one batch")

    opt_g = torch.optim.Adam(bundle.generator.parameters(), lr=cfg.learning_rate, betas=ADAM_BETAS)
    opt_d = torch.optim.Adam(bundle.discriminator.parameters(), lr=cfg.learning_rate, betas=ADAM_BETAS)

    records: list[EpochRecord] = []
    for epoch in range(cfg.epochs):
        order = torch.randperm(train_data.shape[0], generator=rng)
        n_batches = train_data.shape[0] // cfg.batch_size
        critic_counter = 0
        for b in range(n_batches):
            real = train_data[order[b * cfg.batch_size:(b + 1) * cfg.batch_size]]
            # critic update
            opt_d.zero_grad(set_to_none=True)
            noise = NoiseBatch.draw(cfg.batch_size, bundle.noise_dim, generator=noise_rng).values
            fake = bundle.generator(noise).detach()
            penalty = (gradient_penalty(real, fake, bundle.discriminator, rng=rng)
                       if cfg.gradient_penalty_coefficient > 0 else 0.0)
            d_loss = critic_loss(bundle.discriminator(real).reshape(-1),
                                 bundle.discriminator(fake).reshape(-1),
                                 penalty, cfg.gradient_penalty_coefficient)
            if not torch.isfinite(d_loss):
                raise TrainingDiverged(epoch, "critic")
            d_loss.backward()
            opt_d.step()
            critic_counter += 1
            if critic_counter >= cfg.critic_steps_per_generator_step:
                critic_counter = 0
                noise = NoiseBatch.draw(cfg.batch_size, bundle.noise_dim, generator=noise_rng).values
                generator_step(bundle, w, opt_g, noise, epoch=epoch)
        rec = _holdout_metrics(bundle, holdout, metric_rng, w)
        rec.epoch = epoch
        if not all(map(_finite, (rec.loss_obj, rec.loss_gan, rec.loss_alert, rec.loss_total))):
            raise TrainingDiverged(epoch, "metrics")
        records.append(rec)
    return TrainedPair(bundle.generator, bundle.discriminator, records)


def _finite(x: float) -> bool:
    return x == x and abs(x) != float("inf")
