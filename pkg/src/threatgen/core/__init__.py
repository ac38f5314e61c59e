from .losses import (
    LossWeights,
    NonFiniteLossError,
    combined_generator_loss,
    critic_loss,
    generator_gan_loss,
    gradient_penalty,
)
from .metrics import evaluate_discriminator, threshold_for_alert_rate
from .train import (
    ADAM_BETAS,
    ComponentBundle,
    EpochRecord,
    NoiseBatch,
    TrainConfig,
    TrainedPair,
    TrainingDiverged,
    config_digest,
    generator_step,
    load_checkpoint,
    read_metric_log,
    save_checkpoint,
    train,
    write_metric_log,
)

__all__ = [
    "LossWeights",
    "NonFiniteLossError",
    "combined_generator_loss",
    "critic_loss",
    "generator_gan_loss",
    "gradient_penalty",
    "evaluate_discriminator",
    "threshold_for_alert_rate",
    "ADAM_BETAS",
    "ComponentBundle",
    "EpochRecord",
    "NoiseBatch",
    "TrainConfig",
    "TrainedPair",
    "TrainingDiverged",
    "config_digest",
    "generator_step",
    "load_checkpoint",
    "read_metric_log",
    "save_checkpoint",
    "train",
    "write_metric_log",
]
