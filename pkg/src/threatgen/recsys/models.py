"""Group attack generator, single-profile discriminator, and the injection objective."""

from __future__ import annotations

import torch
from torch import nn

from .cf import _as_tensor
from ..sampling import concrete_mask, straight_through_mask


def injection_objective(P: torch.Tensor, target_item: int) -> torch.Tensor:
    """Sum over users and items of max(P[u, j] - P[u, target], 0).

    Zero exactly when the target is every user's top predicted item (ties
    count as success).  A leading batch dimension is averaged over.
    """
    P = _as_tensor(P)
    if not 0 <= target_item < P.shape[-1]:
        raise ValueError(f"target item {target_item} out of range")
    gap = torch.relu(P - P[..., target_item:target_item + 1])
    if P.dim() == 3:
        return gap.sum(dim=(1, 2)).mean()
    return gap.sum()


class ResBlock(nn.Module):
    def __init__(self, dim_in: int, dim_out: int):
        super().__init__()
        self.fc1 = nn.Linear(dim_in, dim_out)
        self.fc2 = nn.Linear(dim_out, dim_out)
        self.skip = nn.Identity() if dim_in == dim_out else nn.Linear(dim_in, dim_out)

    def forward(self, x):
        h = torch.relu(self.fc1(x))
        return torch.relu(self.fc2(h) + self.skip(x))


class RsGenerator(nn.Module):
    """One noise vector expands into a coordinated group of rating profiles.

    A residual trunk encodes the noise; per-attacker slot embeddings decorate it
    so the group members differ while remaining a deterministic function of the
    single noise vector.  The ratings branch lands in [1, 5], the probability
    branch drives the per-item inclusion mask (straight-through by default).
    """

    def __init__(self, n_items: int, group_size: int = 300, noise_dim: int = 128,
                 hidden: int = 128, sampling: str = "straight_through",
                 soft_temperature: float = 0.5):
        super().__init__()
        if sampling not in ("straight_through", "soft"):
            raise ValueError(f"unknown sampling mode {sampling!r}")
        self.n_items = n_items
        self.group_size = group_size
        self.noise_dim = noise_dim
        self.sampling = sampling
        self.soft_temperature = soft_temperature
        self.sample_rng: torch.Generator | None = None

        self.trunk = nn.Sequential(ResBlock(noise_dim, hidden), ResBlock(hidden, hidden))
        self.slot_embedding = nn.Parameter(torch.randn(group_size, hidden) * 0.1)
        self.rating_branch = nn.Sequential(ResBlock(hidden, hidden), ResBlock(hidden, 64))
        self.rating_head = nn.Linear(64, n_items)
        self.prob_branch = nn.Sequential(ResBlock(hidden, hidden), ResBlock(hidden, 64))
        self.prob_head = nn.Linear(64, n_items)

    def set_sample_seed(self, seed: int) -> None:
        self.sample_rng = torch.Generator().manual_seed(seed)

    def branches(self, noise: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Pre-sampling (ratings in [1,5], inclusion probabilities), each (B, A, n_items)."""
        if noise.dim() != 2 or noise.shape[1] != self.noise_dim:
            raise ValueError(f"noise must be (B, {self.noise_dim}), got {tuple(noise.shape)}")
        h = self.trunk(noise)                       # (B, hidden)
        per = h.unsqueeze(1) + self.slot_embedding  # (B, A, hidden)
        ratings = 1.0 + 4.0 * torch.sigmoid(self.rating_head(self.rating_branch(per)))
        probs = torch.sigmoid(self.prob_head(self.prob_branch(per)))
        return ratings, probs

    def forward(self, noise: torch.Tensor) -> torch.Tensor:
        ratings, probs = self.branches(noise)
        if self.sampling == "straight_through":
            mask = straight_through_mask(probs, self.sample_rng)
        else:
            mask = concrete_mask(probs, self.soft_temperature, self.sample_rng)
        return ratings * mask


class RsDiscriminator(nn.Module):
    """Scores one rating profile at a time (single-user view, even for group attacks).

    The ratings row and its mask pass through separate encoders and are then
    concatenated, mirroring the generator's two branches.
    """

    def __init__(self, n_items: int, hidden: int = 64):
        super().__init__()
        self.n_items = n_items
        self.rating_encoder = nn.Sequential(
            nn.Linear(n_items, hidden), ResBlock(hidden, 128), ResBlock(128, 64))
        self.mask_encoder = nn.Sequential(
            nn.Linear(n_items, hidden), ResBlock(hidden, 128), ResBlock(128, 64))
        self.head = nn.Sequential(ResBlock(128, 128), nn.Linear(128, 1))

    def forward(self, ratings: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
        if ratings.dim() == 3:  # (B, A, n_items) group -> flat profile batch
            ratings = ratings.reshape(-1, self.n_items)
        derived = (ratings > 0).to(ratings.dtype)
        if mask is not None:
            mask = mask.reshape(-1, self.n_items)
            if not torch.equal(mask, derived):
                raise ValueError("mask is inconsistent with nonzero ratings")
        else:
            mask = derived
        h = torch.cat([self.rating_encoder(ratings), self.mask_encoder(mask)], dim=1)
        return self.head(h).reshape(-1)
