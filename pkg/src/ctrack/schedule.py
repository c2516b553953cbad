"""Variance schedule for the discrete-time diffusion process.

Conventions: timesteps are 1-based, t in {1, ..., T}; arrays are stored with
index t-1. alpha_t = 1 - beta_t and alpha_bar_t = prod_{s<=t} alpha_s, with
the empty-product convention alpha_bar_0 = 1 (clean data).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

__all__ = ["NoiseSchedule"]


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step variance parameters (beta_t, alpha_t, alpha_bar_t).

    Build through `linear` or `from_betas`, which validate; the bare
    constructor trusts its fields.
    """

    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray
    num_steps: int

    @classmethod
    def from_betas(cls, betas) -> "NoiseSchedule":
        betas = np.asarray(betas, dtype=np.float64)
        if betas.ndim != 1 or betas.size < 1:
            raise InvalidArgumentError("betas must be a non-empty 1-d array")
        if np.any(betas <= 0.0) or np.any(betas >= 1.0):
            raise InvalidArgumentError("betas must lie strictly in (0, 1)")
        alphas = 1.0 - betas
        return cls(
            betas=betas,
            alphas=alphas,
            alpha_bars=np.cumprod(alphas),
            num_steps=int(betas.size),
        )

    @classmethod
    def linear(cls, num_steps: int = 50, beta_start: float | None = None,
               beta_end: float | None = None) -> "NoiseSchedule":
        """Linear beta schedule, rescaled so total noise matches a 1000-step run.

        Defaults: beta from 1e-4 * (1000/T) to 0.02 * (1000/T). For very small
        T the rescaled endpoint leaves (0, 1) and validation rejects it; pass
        explicit endpoints in that case.
        """
        if num_steps < 1:
            raise InvalidArgumentError("num_steps must be >= 1")
        scale = 1000.0 / num_steps
        if beta_start is None:
            beta_start = 1e-4 * scale
        if beta_end is None:
            beta_end = 0.02 * scale
        return cls.from_betas(np.linspace(beta_start, beta_end, num_steps))

    def beta(self, t: int) -> float:
        self._check_step(t)
        return float(self.betas[t - 1])

    def alpha(self, t: int) -> float:
        self._check_step(t)
        return float(self.alphas[t - 1])

    def alpha_bar(self, t: int) -> float:
        """Cumulative signal retention; t may be 0 (returns 1.0)."""
        if t == 0:
            return 1.0
        self._check_step(t)
        return float(self.alpha_bars[t - 1])

    def _check_step(self, t: int) -> None:
        if not 1 <= t <= self.num_steps:
            raise InvalidArgumentError(
                f"timestep {t} outside [1, {self.num_steps}]")
