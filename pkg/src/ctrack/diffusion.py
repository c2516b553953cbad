"""Core sampling procedures over an abstract noise predictor.

Latents are plain float ndarrays of shape (F, H, W, C); with the default
identity codec that is pixel space scaled to [-1, 1]. All operations are
elementwise, so they are agnostic to the actual shape.

Forward process:   x_t = sqrt(alpha_t) x_{t-1} + sqrt(1 - alpha_t) eps
Closed form:       x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) eps
Reverse step:      x_{t-1} = (x_t - beta_t / sqrt(1 - abar_t) eps_hat) / sqrt(alpha_t)
                             + sigma_t z
with sigma_t^2 = beta_t (default) or the posterior variance
(1 - abar_{t-1}) / (1 - abar_t) * beta_t, and sigma_1 forced to 0 so the
final step returns the posterior mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericError
from .schedule import NoiseSchedule

__all__ = [
    "SamplerConfig",
    "GuidanceConfig",
    "Conditioning",
    "forward_step",
    "forward_direct",
    "reverse_step",
    "guided_epsilon",
    "sdedit_regenerate",
    "inpaint_regenerate",
]

SIGMA_MODES = ("beta", "beta_tilde")


@dataclass(frozen=True)
class SamplerConfig:
    """Regeneration strength and stochasticity settings.

    gamma is the noise strength: regeneration starts at t* = floor(gamma * T).
    """

    gamma: float = 0.5
    num_steps: int = 50
    sigma_mode: str = "beta"
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidArgumentError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.num_steps < 1:
            raise InvalidArgumentError("num_steps must be >= 1")
        if self.sigma_mode not in SIGMA_MODES:
            raise InvalidArgumentError(
                f"sigma_mode must be one of {SIGMA_MODES}, got {self.sigma_mode!r}")


@dataclass(frozen=True)
class GuidanceConfig:
    """Counterfactual-enhancement weight (lambda in the guidance combination)."""

    weight: float = 8.0

    def __post_init__(self):
        if not np.isfinite(self.weight) or self.weight < 0.0:
            raise InvalidArgumentError(
                f"guidance weight must be finite and >= 0, got {self.weight}")


@dataclass(eq=False)
class Conditioning:
    """First-frame conditioning: the frame itself plus a tag telling the
    denoiser whether it is the edited (marker inserted) or unedited variant."""

    frame: np.ndarray  # (H, W, 3) uint8
    tag: str  # "edited" | "unedited"


def _check_same_shape(a, b, what):
    if a.shape != b.shape:
        raise InvalidArgumentError(
            f"{what}: shape mismatch {a.shape} vs {b.shape}")


def forward_step(x_prev: np.ndarray, t: int, schedule: NoiseSchedule,
                 noise: np.ndarray) -> np.ndarray:
    """One step of the forward (noising) chain."""
    _check_same_shape(x_prev, noise, "forward_step")
    a = schedule.alpha(t)
    return np.sqrt(a) * x_prev + np.sqrt(1.0 - a) * noise


def forward_direct(x0: np.ndarray, t: int, schedule: NoiseSchedule,
                   noise: np.ndarray) -> np.ndarray:
    """Jump directly to noise level t using the closed form; t=0 returns x0."""
    _check_same_shape(x0, noise, "forward_direct")
    ab = schedule.alpha_bar(t)
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * noise


def _sigma(t: int, schedule: NoiseSchedule, config: SamplerConfig) -> float:
    if t == 1:
        return 0.0
    beta = schedule.beta(t)
    if config.sigma_mode == "beta":
        return float(np.sqrt(beta))
    ab, ab_prev = schedule.alpha_bar(t), schedule.alpha_bar(t - 1)
    return float(np.sqrt((1.0 - ab_prev) / (1.0 - ab) * beta))


def reverse_step(x_t: np.ndarray, t: int, eps_hat: np.ndarray,
                 schedule: NoiseSchedule, config: SamplerConfig,
                 rng: np.random.Generator) -> np.ndarray:
    """One ancestral denoising step; deterministic at t=1 (sigma forced to 0)."""
    _check_same_shape(x_t, eps_hat, "reverse_step")
    if not np.all(np.isfinite(eps_hat)):
        raise NumericError(f"non-finite noise prediction at step {t}")
    a = schedule.alpha(t)
    ab = schedule.alpha_bar(t)
    mean = (x_t - schedule.beta(t) / np.sqrt(1.0 - ab) * eps_hat) / np.sqrt(a)
    sigma = _sigma(t, schedule, config)
    if sigma == 0.0:
        return mean
    return mean + sigma * rng.standard_normal(x_t.shape)


def guided_epsilon(eps_edited: np.ndarray, eps_unedited: np.ndarray,
                   weight: float) -> np.ndarray:
    """Counterfactual enhancement: (w+1) * eps_edited - w * eps_unedited.

    The unedited-conditioning estimate acts as a negative prompt, biasing the
    score away from samples that drop the inserted marker.
    """
    _check_same_shape(eps_edited, eps_unedited, "guided_epsilon")
    if weight < 0.0:
        raise InvalidArgumentError(f"guidance weight must be >= 0, got {weight}")
    return (weight + 1.0) * eps_edited - weight * eps_unedited


def _rng_streams(config: SamplerConfig, rng):
    """Two independent child streams: (sampler noise, inpainting re-noising).

    Accepts an int seed or a SeedSequence; defaults to config.rng_seed. Using
    separate streams keeps the sampler-noise sequence identical between
    sdedit_regenerate and inpaint_regenerate under the same seed.
    """
    if rng is None:
        rng = config.rng_seed
    if isinstance(rng, np.random.SeedSequence):
        ss = rng
    elif isinstance(rng, (int, np.integer)):
        ss = np.random.SeedSequence(int(rng))
    else:
        raise InvalidArgumentError(
            f"rng must be None, an int seed, or a SeedSequence, got {type(rng)}")
    main, renoise = ss.spawn(2)
    return np.random.default_rng(main), np.random.default_rng(renoise)


def _notify_mask(denoiser, mask):
    hook = getattr(denoiser, "set_inpaint_mask", None)
    if hook is not None:
        hook(mask)


def _guided_prediction(denoiser, x_t, t, cond_edited, cond_unedited, guidance):
    eps_edited, eps_unedited = denoiser.epsilon_many(
        x_t, t, [cond_edited, cond_unedited])
    return guided_epsilon(eps_edited, eps_unedited, guidance.weight)


def sdedit_regenerate(x0: np.ndarray, cond_edited: Conditioning,
                      cond_unedited: Conditioning, denoiser,
                      schedule: NoiseSchedule, sampler: SamplerConfig,
                      guidance: GuidanceConfig, rng=None) -> np.ndarray:
    """Partial regeneration: noise x0 to t* = floor(gamma * T), denoise back.

    Each reverse step queries the denoiser once per conditioning and combines
    the two estimates with guided_epsilon (guidance is applied at every step);
    the stochastic z is drawn once per step, after combining. gamma = 0 is the
    no-op case: x0 is returned unchanged and the denoiser is never called.
    """
    t_start = int(np.floor(sampler.gamma * sampler.num_steps))
    if t_start == 0:
        return x0.copy()
    main_rng, _ = _rng_streams(sampler, rng)
    _notify_mask(denoiser, None)
    x = forward_direct(x0, t_start, schedule,
                       main_rng.standard_normal(x0.shape))
    for t in range(t_start, 0, -1):
        eps = _guided_prediction(
            denoiser, x, t, cond_edited, cond_unedited, guidance)
        x = reverse_step(x, t, eps, schedule, sampler, main_rng)
    return x


def inpaint_regenerate(x0: np.ndarray, mask: np.ndarray,
                       cond_edited: Conditioning, cond_unedited: Conditioning,
                       denoiser, schedule: NoiseSchedule,
                       sampler: SamplerConfig, guidance: GuidanceConfig,
                       rng=None) -> np.ndarray:
    """Mask-constrained regeneration.

    Per step the tentative denoised state is blended with a re-noised copy of
    x0: m * x_tilde + (1 - m) * x_original. Pixels outside the mask therefore
    equal x0 exactly at termination (the re-noising at t-1 = 0 is the
    identity). mask has shape (F, H, W) with entries in {0, 1}.
    """
    mask = np.asarray(mask)
    if mask.shape != x0.shape[:3]:
        raise InvalidArgumentError(
            f"mask shape {mask.shape} does not match video {x0.shape[:3]}")
    m = mask.astype(np.float64)[..., None]
    t_start = int(np.floor(sampler.gamma * sampler.num_steps))
    if t_start == 0:
        return x0.copy()
    main_rng, renoise_rng = _rng_streams(sampler, rng)
    _notify_mask(denoiser, mask)
    try:
        x = forward_direct(x0, t_start, schedule,
                           main_rng.standard_normal(x0.shape))
        for t in range(t_start, 0, -1):
            eps = _guided_prediction(
                denoiser, x, t, cond_edited, cond_unedited, guidance)
            x_tilde = reverse_step(x, t, eps, schedule, sampler, main_rng)
            x_orig = forward_direct(x0, t - 1, schedule,
                                    renoise_rng.standard_normal(x0.shape))
            x = m * x_tilde + (1.0 - m) * x_orig
    finally:
        _notify_mask(denoiser, None)
    return x
