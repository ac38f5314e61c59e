"""Five-scenario alert engine over flow tensors, plus its differentiable proxy.

The boolean engine is the ground truth a compliance team would run; the proxy
mirrors its logic with sigmoids (threshold tests), products (AND) and
softmax-weighted maxima (ANY), so a generator can receive gradient feedback
from it.  Sharpness is controlled by a single temperature: as it grows the
proxy converges to the boolean engine on inputs bounded away from thresholds.

Scenarios (per internal account):
  R1  large aggregate inflow:  some w1-window span with total inflow  > theta1
  R2  large aggregate outflow: some w2-window span with total outflow > theta2
  R3  rapid movement of funds: some w3-span where min(in, out) > theta3
      and out >= rho * in
  R4  sudden change in behaviour: some window whose total flow exceeds both
      theta4 and kappa times the trailing mean of the previous w4 windows
  R5  high transaction count: some w5-span with more than theta5 nonzero cells
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

N_RULES = 5


@dataclass(frozen=True)
class RuleConfig:
    # default thresholds are calibrated so that roughly 1 - 2% of accounts in
    # the bundled synthetic legitimate data trigger at least one scenario
    w1: int = 4
    theta1: float = 400.0
    w2: int = 4
    theta2: float = 400.0
    w3: int = 4
    theta3: float = 150.0
    rho: float = 0.5
    w4: int = 4
    kappa: float = 4.0
    theta4: float = 420.0
    w5: int = 4
    theta5: float = 7.0
    temperature: float = 20.0
    count_scale: float = 1.0  # amount treated as "clearly a transaction" by the soft count

    def __post_init__(self):
        for name in ("theta1", "theta2", "theta3", "theta4", "theta5",
                     "rho", "kappa", "temperature", "count_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("w1", "w2", "w3", "w4", "w5"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def _sliding_sum_np(x: np.ndarray, w: int) -> np.ndarray:
    """Sums over every span of w consecutive windows along the last axis."""
    if x.shape[-1] < w:
        return np.zeros(x.shape[:-1] + (0,))
    c = np.cumsum(x, axis=-1)
    head = c[..., w - 1:w]
    return np.concatenate([head, c[..., w:] - c[..., :-w]], axis=-1)


def rules_engine(amounts, cfg: RuleConfig) -> np.ndarray:
    """Boolean alerts, shape (M, 5) for one tensor or (B, M, 5) for a batch.

    `amounts` is a FlowTensor, a (2, M, E, T) array, or a (B, 2, M, E, T) batch.
    """
    a = getattr(amounts, "amounts", amounts)
    a = np.asarray(a, dtype=np.float64)
    single = a.ndim == 4
    if single:
        a = a[None]
    if a.ndim != 5 or a.shape[1] != 2:
        raise ValueError(f"expected (B, 2, M, E, T), got {a.shape}")

    inflow = a[:, 0].sum(axis=2)    # (B, M, T)
    outflow = a[:, 1].sum(axis=2)
    flow = inflow + outflow
    B, M, T = inflow.shape
    alerts = np.zeros((B, M, N_RULES), dtype=bool)

    alerts[:, :, 0] = (_sliding_sum_np(inflow, cfg.w1) > cfg.theta1).any(axis=-1)
    alerts[:, :, 1] = (_sliding_sum_np(outflow, cfg.w2) > cfg.theta2).any(axis=-1)

    in3 = _sliding_sum_np(inflow, cfg.w3)
    out3 = _sliding_sum_np(outflow, cfg.w3)
    alerts[:, :, 2] = ((np.minimum(in3, out3) > cfg.theta3)
                       & (out3 >= cfg.rho * in3)).any(axis=-1)

    if T > cfg.w4:
        trail = _sliding_sum_np(flow, cfg.w4)[..., :-1] / cfg.w4  # mean of the w4 windows before t
        current = flow[..., cfg.w4:]
        alerts[:, :, 3] = ((current > cfg.theta4) & (current > cfg.kappa * trail)).any(axis=-1)

    cells = (a > 0).astype(np.float64).sum(axis=(1, 3))  # nonzero cells per (B, M, T)
    alerts[:, :, 4] = (_sliding_sum_np(cells, cfg.w5) > cfg.theta5).any(axis=-1)

    return alerts[0] if single else alerts


def _sliding_sum_t(x: torch.Tensor, w: int) -> torch.Tensor:
    if x.shape[-1] < w:
        return x.new_zeros(x.shape[:-1] + (0,))
    c = torch.cumsum(x, dim=-1)
    head = c[..., w - 1:w]
    return torch.cat([head, c[..., w:] - c[..., :-w]], dim=-1)


def _step(x: torch.Tensor, threshold: float, tau: float, scale: float | None = None) -> torch.Tensor:
    """Smooth version of x > threshold, normalized so tau is unitless."""
    s = threshold if scale is None else scale
    return torch.sigmoid(tau * (x - threshold) / s)


def _smooth_any(s: torch.Tensor, tau: float) -> torch.Tensor:
    """Softmax-weighted maximum along the last axis; -> max as tau -> inf."""
    if s.shape[-1] == 0:
        return s.new_zeros(s.shape[:-1])
    weights = torch.softmax(tau * s, dim=-1)
    return (weights * s).sum(dim=-1)


def soft_alerts(amounts: torch.Tensor, cfg: RuleConfig,
                counts: torch.Tensor | None = None) -> torch.Tensor:
    """Soft alert activations in [0, 1], shape (B, M, 5); differentiable in amounts.

    By default the count rule infers cell activity from the amounts through a
    sigmoid around `count_scale`.  When the caller has a differentiable
    per-cell activity tensor of the same shape (e.g. a generator's transaction
    probabilities), passing it as `counts` uses it directly, which keeps the
    count rule informative even where the amount sigmoid is flat.
    """
    a = amounts
    if a.dim() == 4:
        a = a.unsqueeze(0)
    if a.dim() != 5 or a.shape[1] != 2:
        raise ValueError(f"expected (B, 2, M, E, T), got {tuple(a.shape)}")
    tau = cfg.temperature

    inflow = a[:, 0].sum(dim=2)
    outflow = a[:, 1].sum(dim=2)
    flow = inflow + outflow
    T = inflow.shape[-1]

    r1 = _smooth_any(_step(_sliding_sum_t(inflow, cfg.w1), cfg.theta1, tau), tau)
    r2 = _smooth_any(_step(_sliding_sum_t(outflow, cfg.w2), cfg.theta2, tau), tau)

    in3 = _sliding_sum_t(inflow, cfg.w3)
    out3 = _sliding_sum_t(outflow, cfg.w3)
    r3 = _smooth_any(
        _step(in3, cfg.theta3, tau)
        * _step(out3, cfg.theta3, tau)
        * torch.sigmoid(tau * (out3 - cfg.rho * in3) / cfg.theta3),
        tau,
    )

    if T > cfg.w4:
        trail = _sliding_sum_t(flow, cfg.w4)[..., :-1] / cfg.w4
        current = flow[..., cfg.w4:]
        r4 = _smooth_any(
            _step(current, cfg.theta4, tau)
            * torch.sigmoid(tau * (current - cfg.kappa * trail) / cfg.theta4),
            tau,
        )
    else:
        r4 = inflow.new_zeros(inflow.shape[:-1])

    if counts is None:
        soft_cells = torch.sigmoid(tau * (a - cfg.count_scale) / cfg.count_scale).sum(dim=(1, 3))
    else:
        c = counts if counts.dim() == 5 else counts.unsqueeze(0)
        if c.shape != a.shape:
            raise ValueError(f"counts shape {tuple(c.shape)} != amounts shape {tuple(a.shape)}")
        soft_cells = c.sum(dim=(1, 3))
    r5 = _smooth_any(_step(_sliding_sum_t(soft_cells, cfg.w5), cfg.theta5, tau), tau)

    return torch.stack([r1, r2, r3, r4, r5], dim=-1)


def rules_proxy(amounts: torch.Tensor, cfg: RuleConfig,
                counts: torch.Tensor | None = None) -> torch.Tensor:
    """Scalar penalty: mean soft alert activation over the batch, accounts and rules."""
    return soft_alerts(amounts, cfg, counts=counts).mean()
