"""Ratings data: MovieLens-format parsing/export and a synthetic surrogate corpus.

The MovieLens 1M ratings file ("UserID::MovieID::Rating::Timestamp") is parsed
bit-exactly when available.  Environments without it can fall back to
`synthetic_ratings`, a latent-factor corpus with popularity skew that exercises
the same code paths at a configurable scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .cf import validate_ratings_matrix


def load_movielens(path) -> tuple[np.ndarray, dict[int, int]]:
    """Parse a '::'-separated ratings file into a dense matrix.

    Returns (R, movie_id_to_column).  User and movie IDs are 1-based in the
    file; movie IDs are remapped to dense columns in sorted-ID order.
    """
    triples = []
    user_ids = set()
    movie_ids = set()
    with open(path, encoding="latin-1") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            user, movie, rating, _ = line.split("::")
            triples.append((int(user), int(movie), int(rating)))
            user_ids.add(int(user))
            movie_ids.add(int(movie))
    user_index = {u: i for i, u in enumerate(sorted(user_ids))}
    movie_index = {m: j for j, m in enumerate(sorted(movie_ids))}
    R = np.zeros((len(user_index), len(movie_index)))
    for user, movie, rating in triples:
        R[user_index[user], movie_index[movie]] = rating
    return R, movie_index


def save_movie_index(path, movie_index: dict[int, int]) -> None:
    with open(path, "w") as fh:
        json.dump({str(k): v for k, v in movie_index.items()}, fh, sort_keys=True)


def load_movie_index(path) -> dict[int, int]:
    with open(path) as fh:
        return {int(k): v for k, v in json.load(fh).items()}


def export_profiles(path, ratings: np.ndarray, movie_index: dict[int, int] | None = None,
                    first_user_id: int = 6041, timestamp: int = 0) -> None:
    """Write attack profiles in the same '::' line format, with synthetic user IDs."""
    column_to_movie = None
    if movie_index is not None:
        column_to_movie = {v: k for k, v in movie_index.items()}
    with open(path, "w") as fh:
        for i, row in enumerate(np.asarray(ratings)):
            user = first_user_id + i
            for j in np.flatnonzero(row):
                movie = column_to_movie[j] if column_to_movie else j + 1
                fh.write(f"{user}::{movie}::{int(round(row[j]))}::{timestamp}\n")


@dataclass(frozen=True)
class SyntheticRatingsConfig:
    n_users: int = 1500
    n_items: int = 1000
    n_factors: int = 6
    min_ratings_per_user: int = 20
    max_ratings_per_user: int = 120
    popularity_exponent: float = 1.0


def synthetic_ratings(cfg: SyntheticRatingsConfig, rng: np.random.Generator) -> np.ndarray:
    """Latent-factor ratings with popularity skew.

    Users and items get random factor vectors; each user rates a random number
    of items sampled with probability proportional to item popularity, and the
    rating is the clipped, rounded affinity plus noise.  This gives cosine
    similarity real structure to work with, which the injection attacks exploit.
    """
    users = rng.normal(size=(cfg.n_users, cfg.n_factors))
    items = rng.normal(size=(cfg.n_items, cfg.n_factors)) / np.sqrt(cfg.n_factors)
    popularity = rng.zipf(1.0 + cfg.popularity_exponent, size=cfg.n_items).astype(float)
    popularity /= popularity.sum()

    R = np.zeros((cfg.n_users, cfg.n_items))
    affinity = users @ items.T
    for u in range(cfg.n_users):
        n_rated = int(rng.integers(cfg.min_ratings_per_user, cfg.max_ratings_per_user + 1))
        rated = rng.choice(cfg.n_items, size=n_rated, replace=False, p=popularity)
        raw = 3.0 + 1.2 * affinity[u, rated] + rng.normal(scale=0.5, size=n_rated)
        R[u, rated] = np.clip(np.rint(raw), 1, 5)
    return validate_ratings_matrix(R)


def pick_target_item(R: np.ndarray, rng: np.random.Generator) -> int:
    """A mid-popularity target: rating count near the median of rated items."""
    counts = (np.asarray(R) > 0).sum(axis=0)
    rated = np.flatnonzero(counts > 0)
    median = np.median(counts[rated])
    near = rated[np.abs(counts[rated] - median) <= max(1.0, 0.1 * median)]
    return int(rng.choice(near if near.size else rated))
