"""Attack profile batches, the four heuristic baselines, and attack evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch

from .cf import _as_tensor, predict_for_users, top_n_items, validate_ratings_matrix

DEFAULT_FILLER_COUNT = 90


@dataclass(frozen=True)
class RecommenderConfig:
    k: int | str = 400           # neighbor count at inference, or "all"
    target_item: int = 0
    top_n: int = 10


@dataclass
class AttackProfileBatch:
    """A group of synthetic rating profiles, possibly from a single noise vector."""

    ratings: np.ndarray                      # (A, n_items), {0} union [1, 5]
    mask: np.ndarray                         # (A, n_items) binary
    group_size: int
    source_noise: Optional[np.ndarray] = None

    def __post_init__(self):
        self.ratings = np.asarray(self.ratings, dtype=np.float64)
        self.mask = np.asarray(self.mask)
        if self.ratings.shape != self.mask.shape:
            raise ValueError("ratings and mask shapes differ")
        if self.ratings.shape[0] != self.group_size:
            raise ValueError("group_size does not match the number of profiles")
        if not np.array_equal(self.mask != 0, self.ratings != 0):
            raise ValueError("ratings must be nonzero exactly where mask = 1")
        rated = self.ratings[self.ratings != 0]
        if rated.size and (rated.min() < 1 or rated.max() > 5):
            raise ValueError("present ratings must lie in [1, 5]")

    def integerized(self) -> "AttackProfileBatch":
        """Round present ratings to the nearest integer in [1, 5] (inference form)."""
        r = np.where(self.mask != 0, np.clip(np.rint(self.ratings), 1, 5), 0.0)
        return AttackProfileBatch(r, self.mask.copy(), self.group_size, self.source_noise)

    @classmethod
    def from_generator(cls, generator, noise: torch.Tensor) -> "AttackProfileBatch":
        """One group from one noise vector (noise shape (1, noise_dim))."""
        if noise.shape[0] != 1:
            raise ValueError("a profile batch derives from a single noise vector")
        with torch.no_grad():
            profiles = generator(noise)[0].numpy()
        return cls(profiles, (profiles != 0).astype(np.int8), profiles.shape[0],
                   source_noise=noise[0].numpy())


def top_decile_items(R: np.ndarray, by: str, min_ratings: int = 20) -> np.ndarray:
    """Item indices in the top 10% by mean rating ('rating') or rating count ('count').

    The mean-rating ranking only considers items with at least `min_ratings`
    ratings, so a single 5-star rating does not make an item "highest rated".
    """
    R = np.asarray(R)
    counts = (R > 0).sum(axis=0)
    n_top = max(1, R.shape[1] // 10)
    if by == "count":
        order = np.argsort(-counts, kind="stable")
        return order[:n_top]
    if by == "rating":
        with np.errstate(invalid="ignore"):
            means = np.where(counts > 0, R.sum(axis=0) / np.maximum(counts, 1), 0.0)
        means = np.where(counts >= min_ratings, means, -np.inf)
        order = np.argsort(-means, kind="stable")
        return order[:n_top]
    raise ValueError(f"unknown ranking {by!r}")


def baseline_attack(kind: int, n_profiles: int, target_item: int, rng: np.random.Generator,
                    R: np.ndarray, filler_count: int = DEFAULT_FILLER_COUNT) -> AttackProfileBatch:
    """The four heuristic injection strategies.

    1: rate only the target (5).  2: target 5 plus `filler_count` random ratings
    on random items.  3: fillers drawn from the top decile by mean rating.
    4: fillers drawn from the top decile by rating count.
    """
    if kind not in (1, 2, 3, 4):
        raise ValueError("kind must be in 1..4")
    R = validate_ratings_matrix(R, require_rated_rows=False)
    n_items = R.shape[1]
    ratings = np.zeros((n_profiles, n_items))
    ratings[:, target_item] = 5.0
    if kind != 1:
        if kind == 2:
            pool = np.arange(n_items)
        elif kind == 3:
            pool = top_decile_items(R, by="rating")
        else:
            pool = top_decile_items(R, by="count")
        pool = pool[pool != target_item]
        if len(pool) < filler_count:
            raise ValueError(f"filler pool has {len(pool)} items, {filler_count} needed")
        for p in range(n_profiles):
            items = rng.choice(pool, size=filler_count, replace=False)
            ratings[p, items] = rng.integers(1, 6, size=filler_count)
    return AttackProfileBatch(ratings, (ratings != 0).astype(np.int8), n_profiles)


def evaluate_attack(R, attack: AttackProfileBatch, cfg: RecommenderConfig,
                    inject_count: int) -> int:
    """Number of real users whose top-n recommendations contain the target after
    injecting the first `inject_count` attack profiles.

    Injected users count as neighbors but never as affected users; real users
    who already rated the target are skipped.
    """
    if inject_count > attack.group_size:
        raise ValueError("inject_count exceeds the attack group size")
    R = _as_tensor(validate_ratings_matrix(np.asarray(R)))
    n_real = R.shape[0]
    profiles = _as_tensor(attack.integerized().ratings[:inject_count])
    R_all = torch.cat([R, profiles]) if inject_count else R
    query = torch.arange(n_real)
    P = predict_for_users(R_all, query, k=cfg.k)
    top = top_n_items(P[:, :R.shape[1]], R, cfg.top_n)
    hit = (top == cfg.target_item).any(dim=1)
    unrated = R[:, cfg.target_item] == 0
    return int((hit & unrated).sum())
