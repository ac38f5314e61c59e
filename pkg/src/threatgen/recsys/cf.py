"""User-based collaborative filtering with cosine similarity.

The numerical core is torch so predicted ratings stay differentiable with
respect to injected profiles; `UserBasedCF` wraps it in an sklearn-style
estimator for plain evaluation work.
"""

from __future__ import annotations

import numpy as np
import torch
from sklearn.base import BaseEstimator

EPSILON = 1e-8


def validate_ratings_matrix(R: np.ndarray, require_rated_rows: bool = True) -> np.ndarray:
    R = np.asarray(R)
    if R.ndim != 2:
        raise ValueError("ratings matrix must be 2D")
    if np.any((R < 0) | (R > 5)):
        raise ValueError("ratings must lie in [0, 5] (0 = missing)")
    if require_rated_rows and np.any((R > 0).sum(axis=1) == 0):
        raise ValueError("every user row must contain at least one rating")
    return R


def _as_tensor(R, dtype=torch.float64) -> torch.Tensor:
    """Float tensor view of R; existing float tensors keep their dtype (and autograd)."""
    if isinstance(R, torch.Tensor):
        return R if R.is_floating_point() else R.to(dtype)
    return torch.as_tensor(np.asarray(R), dtype=dtype)


def user_similarity(R) -> torch.Tensor:
    """Cosine similarity between rating rows; zero diagonal, zero-norm rows map to 0."""
    R = _as_tensor(R)
    norms = R.norm(dim=1, keepdim=True)
    normed = R / norms.clamp_min(EPSILON)
    sim = normed @ normed.T
    sim = sim * (norms > 0) * (norms > 0).T
    sim = sim * (1.0 - torch.eye(sim.shape[0], dtype=sim.dtype))
    return sim


def _topk_mask(sim: torch.Tensor, k: int) -> torch.Tensor:
    if k >= sim.shape[1]:
        return sim
    kept = torch.zeros_like(sim)
    _, idx = torch.topk(sim, k, dim=1)
    return kept.scatter(1, idx, sim.gather(1, idx))


def predict_from_similarity(sim: torch.Tensor, R: torch.Tensor,
                            epsilon: float = EPSILON) -> torch.Tensor:
    """P = (sim @ R) / (sim @ rated + epsilon): a weighted average on the rating scale."""
    rated = (R > 0).to(R.dtype)
    return (sim @ R) / (sim @ rated + epsilon)


def predict_ratings(R, k: int | str = "all", epsilon: float = EPSILON) -> torch.Tensor:
    """Predicted ratings for every user.

    k='all' is the training-mode weighted average over all users; an integer k
    restricts each user's neighborhood to the k most similar users (inference
    mode).  The two coincide when k >= number of users.
    """
    R = _as_tensor(R)
    sim = user_similarity(R)
    if k != "all":
        sim = _topk_mask(sim, int(k))
    return predict_from_similarity(sim, R, epsilon)


def predict_for_users(R_all: torch.Tensor, query_idx: torch.Tensor, k: int | str = "all",
                      epsilon: float = EPSILON) -> torch.Tensor:
    """Predictions for the query rows of R_all, with every row (injected profiles
    included) available as a neighbor; a user is never their own neighbor."""
    R_all = _as_tensor(R_all)
    norms = R_all.norm(dim=1, keepdim=True)
    normed = R_all / norms.clamp_min(EPSILON)
    sim = normed[query_idx] @ normed.T
    sim = sim * (norms[query_idx] > 0) * (norms > 0).T
    self_mask = torch.zeros_like(sim)
    self_mask[torch.arange(len(query_idx)), query_idx] = 1.0
    sim = sim * (1.0 - self_mask)
    if k != "all":
        sim = _topk_mask(sim, int(k))
    return predict_from_similarity(sim, R_all, epsilon)


def top_n_items(P: torch.Tensor, R: torch.Tensor, n: int) -> torch.Tensor:
    """Top-n unrated items per user by predicted rating (ties broken by item index)."""
    masked = P.clone()
    masked[R > 0] = -torch.inf
    return torch.topk(masked, n, dim=1).indices


class UserBasedCF(BaseEstimator):
    """sklearn-style wrapper: fit on a ratings matrix, predict ratings or top-n lists."""

    def __init__(self, k=400, top_n=10, epsilon=EPSILON):
        self.k = k
        self.top_n = top_n
        self.epsilon = epsilon

    def fit(self, R, y=None):
        self.R_ = _as_tensor(validate_ratings_matrix(np.asarray(R)))
        return self

    def predict(self, X=None) -> np.ndarray:
        """Predicted ratings for all fitted users (inference mode, top-k neighbors)."""
        return predict_ratings(self.R_, k=self.k, epsilon=self.epsilon).numpy()

    def recommend(self) -> np.ndarray:
        """Top-n unrated item indices per user."""
        P = predict_ratings(self.R_, k=self.k, epsilon=self.epsilon)
        return top_n_items(P, self.R_, self.top_n).numpy()
