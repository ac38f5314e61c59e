"""Closed-form analysis of the 1D Gaussian toy system.

Legitimate activity is N(mu_d, sigma_d), generated activity is N(mu_g, sigma_g),
and the generator trades off a divergence term (weight 1 - alpha) against a
"push the mean up" objective (weight alpha).  Everything here is analytic: the
divergence, its gradient in mu_g, the resulting gradient-flow dynamics, and the
stable fixed point mu_g* = mu_d + alpha/(1-alpha) * k with k = 2(sigma_g^2 + sigma_d^2).

Note: the closed-form divergence treats the two-component mixture as a Gaussian
with variance sigma_d^2 + sigma_g^2.  That approximation is reproduced verbatim,
on purpose; do not replace it with the exact mixture divergence.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field


class UnstableDiscretizationError(ValueError):
    """Raised when the explicit-Euler step size would make the iteration diverge."""


@dataclass(frozen=True)
class GaussianToyParams:
    mu_d: float = 0.0
    sigma_d: float = 1.0
    mu_g: float = 0.0
    sigma_g: float = 1.0
    alpha: float = 0.0
    eta: float = 0.05

    def __post_init__(self):
        if self.sigma_d <= 0 or self.sigma_g <= 0:
            raise ValueError("sigma_d and sigma_g must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.eta <= 0:
            raise ValueError("eta must be positive")

    @property
    def k(self) -> float:
        """k = 2(sigma_g^2 + sigma_d^2), the variance scale of the flow."""
        return 2.0 * (self.sigma_g**2 + self.sigma_d**2)

    @property
    def d(self) -> float:
        """Decay rate (1 - alpha)/k of the linear dynamical system."""
        return (1.0 - self.alpha) / self.k

    def with_mu_g(self, mu_g: float) -> "GaussianToyParams":
        return GaussianToyParams(self.mu_d, self.sigma_d, mu_g, self.sigma_g, self.alpha, self.eta)


@dataclass
class FlowTrajectory:
    times: list[int]
    mu_g_values: list[float]
    converged: bool
    fixed_point_estimate: float

    def __post_init__(self):
        if len(self.times) != len(self.mu_g_values):
            raise ValueError("times and mu_g_values must have equal length")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("step,mu_g\n")
        for t, mu in zip(self.times, self.mu_g_values):
            buf.write(f"{t},{mu!r}\n")
        return buf.getvalue()


def jsd_closed_form(p: GaussianToyParams) -> float:
    """Closed-form divergence between the data and generated Gaussians.

    Uses sigma_m^2 = sigma_d^2 + sigma_g^2 for the mixture term.
    """
    sm2 = p.sigma_d**2 + p.sigma_g**2
    sm = math.sqrt(sm2)
    mid = 0.5 * (p.mu_d + p.mu_g)
    term_d = math.log(sm / p.sigma_d) + (p.sigma_d**2 + (p.mu_d - mid) ** 2) / (2.0 * sm2) - 0.5
    term_g = math.log(sm / p.sigma_g) + (p.sigma_g**2 + (p.mu_g - mid) ** 2) / (2.0 * sm2) - 0.5
    return 0.5 * (term_d + term_g)


def jsd_gradient_mu_g(p: GaussianToyParams) -> float:
    """d(jsd_closed_form)/d(mu_g) = (mu_g - mu_d) / (4 sigma_g^2 + 4 sigma_d^2)."""
    return (p.mu_g - p.mu_d) / (4.0 * p.sigma_g**2 + 4.0 * p.sigma_d**2)


def generator_loss_gradient(p: GaussianToyParams) -> float:
    """Gradient of the combined generator loss in mu_g: (1-alpha)(mu_g - mu_d)/k - alpha."""
    return (1.0 - p.alpha) * (p.mu_g - p.mu_d) / p.k - p.alpha


def fixed_point(p: GaussianToyParams) -> float:
    """Stable fixed point mu_g* = mu_d + alpha/(1-alpha) * k; infinite at alpha = 1."""
    if p.alpha >= 1.0:
        return math.inf
    return p.mu_d + p.alpha / (1.0 - p.alpha) * p.k


def simulate_flow(
    p: GaussianToyParams,
    steps: int,
    tolerance: float = 1e-3,
    stop_at_tolerance: bool = True,
) -> FlowTrajectory:
    """Explicit-Euler integration of d(mu_g)/dt = -eta * generator_loss_gradient.

    The iteration contracts iff eta * d < 2; larger steps are rejected rather
    than silently diverging.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if p.alpha >= 1.0:
        raise UnstableDiscretizationError("alpha = 1 has its fixed point at infinity")
    if p.eta * p.d >= 2.0:
        raise UnstableDiscretizationError(
            f"eta*d = {p.eta * p.d:.3g} >= 2: explicit Euler diverges at this step size"
        )
    target = fixed_point(p)
    mu = p.mu_g
    times = [0]
    values = [mu]
    converged = abs(mu - target) < tolerance
    for t in range(1, steps + 1):
        mu = mu - p.eta * generator_loss_gradient(p.with_mu_g(mu))
        times.append(t)
        values.append(mu)
        if abs(mu - target) < tolerance:
            converged = True
            if stop_at_tolerance:
                break
    return FlowTrajectory(times, values, converged, target)


@dataclass
class PhasePortrait:
    """Velocity field d(mu_g)/dt over a (alpha, mu_g) grid plus the fixed-point curve."""

    rows: list[tuple[float, float, float]] = field(default_factory=list)
    fixed_points: list[tuple[float, float]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("alpha,mu_g,velocity\n")
        for alpha, mu_g, v in self.rows:
            buf.write(f"{alpha!r},{mu_g!r},{v!r}\n")
        return buf.getvalue()

    def fixed_point_csv(self) -> str:
        buf = io.StringIO()
        buf.write("alpha,mu_g_star\n")
        for alpha, star in self.fixed_points:
            buf.write(f"{alpha!r},{star!r}\n")
        return buf.getvalue()


def phase_portrait(mu_g_grid, alpha_grid, p: GaussianToyParams) -> PhasePortrait:
    """Tabulate -eta * generator_loss_gradient on the grid, for external plotting."""
    mu_g_grid = list(mu_g_grid)
    alpha_grid = list(alpha_grid)
    if not mu_g_grid or not alpha_grid:
        raise ValueError("grids must be non-empty")
    portrait = PhasePortrait()
    for alpha in alpha_grid:
        q = GaussianToyParams(p.mu_d, p.sigma_d, p.mu_g, p.sigma_g, alpha, p.eta)
        portrait.fixed_points.append((alpha, fixed_point(q)))
        for mu_g in mu_g_grid:
            vel = -p.eta * generator_loss_gradient(q.with_mu_g(mu_g))
            portrait.rows.append((alpha, mu_g, vel))
    return portrait


def parse_phase_portrait_csv(text: str) -> PhasePortrait:
    """Inverse of PhasePortrait.to_csv (fixed-point curve is not round-tripped)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "alpha,mu_g,velocity":
        raise ValueError("not a phase-portrait table")
    portrait = PhasePortrait()
    for ln in lines[1:]:
        a, m, v = ln.split(",")
        portrait.rows.append((float(a), float(m), float(v)))
    return portrait
