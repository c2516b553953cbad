"""Concrete denoisers: two analytic oracles for verification.

Both oracles are exact closed forms, which makes every downstream pipeline
check deterministic: the reverse chain driven by a point-target predictor
lands exactly on its target at the final (deterministic) step.
"""

from __future__ import annotations

import abc

import numpy as np

from .errors import InvalidArgumentError
from .schedule import NoiseSchedule

__all__ = [
    "Denoiser",
    "AnalyticGaussianDenoiser",
    "TrajectoryOracleDenoiser",
]


class Denoiser(abc.ABC):
    """Noise-prediction interface: epsilon(x_t, t, cond) -> eps, same shape.

    Backends must either be safe for concurrent calls or serialize internally
    and document it. `epsilon_many` exists so batched backends (the remote
    client) can serve several conditionings from one request.
    """

    @abc.abstractmethod
    def epsilon(self, x_t: np.ndarray, t: int, cond) -> np.ndarray:
        ...

    def epsilon_many(self, x_t: np.ndarray, t: int, conds) -> list:
        return [self.epsilon(x_t, t, c) for c in conds]


class AnalyticGaussianDenoiser(Denoiser):
    """Optimal noise predictor for data distributed N(mu, sigma^2 I).

    x_t = sqrt(abar_t) x_0 + sqrt(1-abar_t) eps is Gaussian with mean
    sqrt(abar_t) mu and variance abar_t sigma^2 + 1 - abar_t, so the
    posterior-mean prediction is

        eps_hat = sqrt(1-abar_t) (x_t - sqrt(abar_t) mu)
                  / (abar_t sigma^2 + 1 - abar_t).

    Conditioning is ignored. Stateless; safe for concurrent calls.
    """

    def __init__(self, mu, sigma: float, schedule: NoiseSchedule):
        if sigma < 0:
            raise InvalidArgumentError(f"sigma must be >= 0, got {sigma}")
        self.mu = np.asarray(mu, dtype=np.float64)
        self.sigma = float(sigma)
        self.schedule = schedule

    def epsilon(self, x_t, t, cond=None):
        ab = self.schedule.alpha_bar(t)
        num = np.sqrt(1.0 - ab) * (x_t - np.sqrt(ab) * self.mu)
        return num / (ab * self.sigma ** 2 + 1.0 - ab)


class TrajectoryOracleDenoiser(Denoiser):
    """Point-target predictor whose clean target is known by construction.

    The conditioning tag selects the target: "edited" -> target_with_marker,
    "unedited" -> target_without_marker; the base prediction inverts the
    closed-form noising, eps_hat = (x_t - sqrt(abar_t) target) / sqrt(1-abar_t).

    Two knobs model failure modes of a real generator:

    * contamination w in [0, 1): under the edited conditioning the prediction
      is mixed, (1-w) eps_marker + w eps_no_marker — the strong natural-video
      prior partially ignoring the inserted marker. Algebraically, guidance
      weight w/(1-w) recovers eps_marker exactly.
    * drift (du, dv): both targets are translated by a global integer shift,
      modeling the whole generation sliding relative to the input. The shift
      applies only to unconstrained generation: when a sampler announces an
      inpainting mask via `set_inpaint_mask`, the pinned context makes a
      global shift impossible, so the clean targets are used. This is a
      modeling assumption of the harness, not an emergent property.

    Not safe for concurrent use across samplers (the mask hook is stateful);
    build one instance per run.
    """

    def __init__(self, target_with_marker: np.ndarray,
                 target_without_marker: np.ndarray, schedule: NoiseSchedule,
                 contamination: float = 0.0, drift=None):
        if target_with_marker.shape != target_without_marker.shape:
            raise InvalidArgumentError(
                "oracle targets must share a shape, got "
                f"{target_with_marker.shape} vs {target_without_marker.shape}")
        if not 0.0 <= contamination < 1.0:
            raise InvalidArgumentError(
                f"contamination must be in [0, 1), got {contamination}")
        self.schedule = schedule
        self.contamination = float(contamination)
        self.drift = None if drift is None else (int(drift[0]), int(drift[1]))
        self._targets = {
            "edited": target_with_marker.astype(np.float64),
            "unedited": target_without_marker.astype(np.float64),
        }
        self._drifted = None
        self._mask_active = False

    def set_inpaint_mask(self, mask):
        self._mask_active = mask is not None

    def _target(self, tag):
        if tag not in self._targets:
            raise InvalidArgumentError(f"unknown conditioning tag {tag!r}")
        if self.drift is None or self._mask_active:
            return self._targets[tag]
        if self._drifted is None:
            self._drifted = {
                k: _shift_video(v, self.drift) for k, v in self._targets.items()
            }
        return self._drifted[tag]

    def _base_epsilon(self, x_t, t, tag):
        ab = self.schedule.alpha_bar(t)
        return (x_t - np.sqrt(ab) * self._target(tag)) / np.sqrt(1.0 - ab)

    def epsilon(self, x_t, t, cond):
        tag = getattr(cond, "tag", cond)
        eps = self._base_epsilon(x_t, t, tag)
        if tag == "edited" and self.contamination > 0.0:
            w = self.contamination
            eps = (1.0 - w) * eps + w * self._base_epsilon(x_t, t, "unedited")
        return eps


def _shift_video(video: np.ndarray, shift) -> np.ndarray:
    """Translate every frame by integer (du, dv) with edge replication."""
    du, dv = shift
    h, w = video.shape[1:3]
    us = np.clip(np.arange(w) - du, 0, w - 1)
    vs = np.clip(np.arange(h) - dv, 0, h - 1)
    return video[:, vs][:, :, us]
