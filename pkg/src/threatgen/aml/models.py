"""Money-laundering objective and the sparse flow-tensor generator/discriminator pair."""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..sampling import concrete_mask, straight_through_mask


def account_throughput(amounts) -> np.ndarray:
    """Per-account sqrt(total_in * total_out); shape (B, M) (or (M,) for one tensor)."""
    a = getattr(amounts, "amounts", amounts)
    if isinstance(a, torch.Tensor):
        a = a.detach().numpy()
    a = np.asarray(a, dtype=np.float64)
    single = a.ndim == 4
    if single:
        a = a[None]
    total_in = a[:, 0].sum(axis=(2, 3))
    total_out = a[:, 1].sum(axis=(2, 3))
    thr = np.sqrt(total_in * total_out)
    return thr[0] if single else thr


def mule_objective(amounts: torch.Tensor, eps: float = 0.0) -> torch.Tensor:
    """Negative mean geometric mean of per-account in/out totals.

    Minimizing this pushes flow-through volume up while keeping inflow and
    outflow balanced: an account that only receives (or only sends) scores 0.
    `eps` regularizes the sqrt for training; the default keeps the exact value.
    """
    if amounts.dim() == 4:
        amounts = amounts.unsqueeze(0)
    total_in = amounts[:, 0].sum(dim=(2, 3))
    total_out = amounts[:, 1].sum(dim=(2, 3))
    return -torch.sqrt(total_in * total_out + eps).mean()


class AmlGenerator(nn.Module):
    """Dense + transposed-convolution trunk with amount and probability branches.

    The probability branch drives a sparsity mask (straight-through sampling by
    default) that multiplies the softplus amounts, so output entries are exactly
    zero wherever the mask is zero.
    """

    def __init__(self, noise_dim: int = 100, n_internal: int = 5, n_external: int = 10,
                 n_windows: int = 64, channels: int = 32, amount_scale: float = 100.0,
                 sampling: str = "straight_through", soft_temperature: float = 0.5):
        super().__init__()
        if n_windows % 4 != 0:
            raise ValueError("n_windows must be divisible by 4")
        if sampling not in ("straight_through", "soft"):
            raise ValueError(f"unknown sampling mode {sampling!r}")
        self.noise_dim = noise_dim
        self.n_internal = n_internal
        self.n_external = n_external
        self.n_windows = n_windows
        self.amount_scale = amount_scale
        self.sampling = sampling
        self.soft_temperature = soft_temperature
        self.sample_rng: torch.Generator | None = None
        # probability branch of the most recent forward pass, kept so loss
        # terms that need per-cell transaction probabilities (e.g. a count
        # rule proxy) can backpropagate through them
        self.last_probs: torch.Tensor | None = None

        t0 = n_windows // 4
        self._t0 = t0
        self._channels = channels
        cells = 2 * n_internal * n_external
        self.trunk = nn.Sequential(
            nn.Linear(noise_dim, 400), nn.ReLU(),
            nn.Linear(400, 1600), nn.ReLU(),
            nn.Linear(1600, channels * t0), nn.ReLU(),
        )
        self.upsample = nn.Sequential(
            nn.ConvTranspose1d(channels, channels, 4, 2, 1), nn.ReLU(),
            nn.ConvTranspose1d(channels, channels, 4, 2, 1), nn.ReLU(),
        )
        self.amount_head = nn.Conv1d(channels, cells, 1)
        self.prob_head = nn.Conv1d(channels, cells, 1)

    def set_sample_seed(self, seed: int) -> None:
        self.sample_rng = torch.Generator().manual_seed(seed)

    def branches(self, noise: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Pre-sampling (amounts, probabilities), each (B, 2, M, E, T)."""
        if noise.dim() != 2 or noise.shape[1] != self.noise_dim:
            raise ValueError(f"noise must be (B, {self.noise_dim}), got {tuple(noise.shape)}")
        h = self.trunk(noise).reshape(-1, self._channels, self._t0)
        h = self.upsample(h)
        shape = (-1, 2, self.n_internal, self.n_external, self.n_windows)
        amounts = self.amount_scale * nn.functional.softplus(self.amount_head(h)).reshape(shape)
        probs = torch.sigmoid(self.prob_head(h)).reshape(shape)
        return amounts, probs

    def forward(self, noise: torch.Tensor) -> torch.Tensor:
        amounts, probs = self.branches(noise)
        self.last_probs = probs
        if self.sampling == "straight_through":
            mask = straight_through_mask(probs, self.sample_rng)
        else:
            mask = concrete_mask(probs, self.soft_temperature, self.sample_rng)
        return amounts * mask


class AmlDiscriminator(nn.Module):
    """Two-branch critic over (amounts, counts) with account-permutation invariance.

    Each (direction, internal, external) cell's time series passes through a
    shared temporal convolution stack; cell features are then pooled over all
    account cells.  Pooling sorts along the cell axis before summing, so the
    score is bitwise identical under any permutation of internal or external
    accounts.
    """

    def __init__(self, n_internal: int = 5, n_external: int = 10, n_windows: int = 64,
                 channels: int = 8):
        super().__init__()
        if n_windows % 16 != 0:
            raise ValueError("n_windows must be divisible by 16")
        self.n_internal = n_internal
        self.n_external = n_external
        self.n_windows = n_windows
        feat = channels * (n_windows // 16)

        def conv_stack():
            return nn.Sequential(
                nn.Conv1d(1, channels, 6, 4, 1), nn.LeakyReLU(0.2),
                nn.Conv1d(channels, channels, 6, 4, 1), nn.LeakyReLU(0.2),
            )

        self.amount_conv = conv_stack()
        self.count_conv = conv_stack()
        self.head = nn.Sequential(
            nn.Linear(2 * 2 * feat, 128), nn.LeakyReLU(0.2),
            nn.Linear(128, 32), nn.LeakyReLU(0.2),
            nn.Linear(32, 1),
        )
        self._feat = feat

    def _branch(self, x: torch.Tensor, conv: nn.Module) -> torch.Tensor:
        b = x.shape[0]
        cells = 2 * self.n_internal * self.n_external
        h = conv(x.reshape(b * cells, 1, self.n_windows))
        h = h.reshape(b, 2, self.n_internal * self.n_external, self._feat)
        h, _ = torch.sort(h, dim=2)  # account order must not leak into the score
        return h.mean(dim=2).reshape(b, 2 * self._feat)

    def forward(self, amounts: torch.Tensor, counts: torch.Tensor | None = None) -> torch.Tensor:
        if amounts.dim() == 4:
            amounts = amounts.unsqueeze(0)
        derived = (amounts > 0).to(amounts.dtype)
        if counts is not None:
            if counts.shape != amounts.shape or not torch.equal(counts, derived):
                raise ValueError("counts tensor is inconsistent with amounts > 0")
        else:
            counts = derived
        fa = self._branch(torch.log1p(amounts), self.amount_conv)
        fc = self._branch(counts, self.count_conv)
        return self.head(torch.cat([fa, fc], dim=1)).reshape(-1)
