"""Sampler diagnostics: moment checks and guidance-weight sweeps.

Oracle-only by design — these checks need a backend whose target distribution
is known in closed form.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .backends import AnalyticGaussianDenoiser
from .config import PipelineConfig
from .diffusion import GuidanceConfig, SamplerConfig, reverse_step
from .pipeline import run_query
from .schedule import NoiseSchedule
from .synthetic import make_suite

__all__ = ["moment_check", "guidance_sweep", "run_diagnostics"]


def moment_check(mu: float = 0.3, sigma: float = 0.5, num_steps: int = 50,
                 num_samples: int = 5000, field_shape=(8, 8, 1),
                 seed: int = 0, sigma_mode: str = "beta") -> dict:
    """Full reverse chain from pure noise with the analytic Gaussian denoiser.

    Every element of the batched field evolves as an independent scalar chain,
    so the empirical mean/variance over all elements estimates the sampler's
    match to the target N(mu, sigma^2).
    """
    schedule = NoiseSchedule.linear(num_steps)
    denoiser = AnalyticGaussianDenoiser(mu, sigma, schedule)
    config = SamplerConfig(gamma=1.0, num_steps=num_steps,
                           sigma_mode=sigma_mode, rng_seed=seed)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((num_samples,) + tuple(field_shape))
    for t in range(num_steps, 0, -1):
        eps = denoiser.epsilon(x, t, None)
        x = reverse_step(x, t, eps, schedule, config, rng)
    mean, var = float(x.mean()), float(x.var())
    return {
        "target_mean": mu,
        "target_var": sigma ** 2,
        "sample_mean": mean,
        "sample_var": var,
        "mean_abs_error": abs(mean - mu),
        "var_rel_error": abs(var - sigma ** 2) / sigma ** 2,
        "num_values": int(x.size),
    }


def _marker_retention(cfg: PipelineConfig, case, weight: float) -> float:
    """Fraction of gt-visible frames where the tracker finds the marker."""
    sweep_cfg = replace(cfg, guidance=GuidanceConfig(weight=weight))
    result = run_query(case.video, case.gt.points[0], sweep_cfg, gt=case.gt,
                       video_id=case.case_id)
    vis = case.gt.visible
    return float(result.track.visible[vis].sum() / vis.sum())


def guidance_sweep(cfg: PipelineConfig, weights=(0.0, 1.0, 4.0, 8.0),
                   contamination: float = 0.5) -> dict:
    """Marker retention vs guidance weight on the contaminated oracle."""
    case = make_suite(1, "contamination", resolution=cfg.synth.resolution,
                      num_frames=cfg.synth.num_frames, seed=cfg.synth.seed)[0]
    sweep_cfg = replace(
        cfg,
        backend=replace(cfg.backend, kind="oracle",
                        contamination=contamination),
        refinement=replace(cfg.refinement, rounds=0),
    )
    points = [{"lambda": w, "retention": _marker_retention(sweep_cfg, case, w)}
              for w in weights]
    return {"contamination": contamination, "case": case.case_id,
            "points": points}


def run_diagnostics(cfg: PipelineConfig) -> dict:
    mom = moment_check(num_steps=cfg.sampler.num_steps, seed=cfg.seed,
                       sigma_mode=cfg.sampler.sigma_mode)
    sweep = guidance_sweep(cfg)
    return {
        "schema": 1,
        "moments": mom,
        "moments_ok": bool(mom["mean_abs_error"] <= 0.05 * 0.5
                           and mom["var_rel_error"] <= 0.10),
        "guidance_sweep": sweep,
    }
