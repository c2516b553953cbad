"""End-to-end tracking pipeline.

For one query: rebalance the video, insert the marker at the query point in
the first frame, pad to 4k+1 frames, regenerate with partial-noise denoising
under counterfactual guidance, extract the track by color, then run
mask-constrained refinement rounds. Oracle-backend runs build their clean
targets from the pipeline's own preprocessed video, so preprocessing
ablations change what the oracle generates, exactly as they would change what
a real generator sees.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .backends import AnalyticGaussianDenoiser, TrajectoryOracleDenoiser
from .config import PipelineConfig
from .diffusion import Conditioning, sdedit_regenerate
from .errors import ConfigError, InvalidArgumentError
from .refinement import RegenContext, refine_track
from .schedule import NoiseSchedule
from .synthetic import build_oracle_targets
from .tracker import Track, track_video
from .videoprep import (insert_marker, pad_video, rebalance_colors,
                        run_preprocess_hook, truncate_video, unit_to_video,
                        video_to_unit)

__all__ = ["QueryResult", "run_query", "run_queries", "extend_track"]


@dataclass
class QueryResult:
    track: Track
    coarse_track: Track
    generated: np.ndarray          # coarse regeneration, original length
    refined_video: np.ndarray | None


def extend_track(gt: Track, length: int) -> Track:
    """Repeat the last entry so ground truth matches a padded video."""
    if len(gt) >= length:
        return gt
    extra = length - len(gt)
    points = np.concatenate([gt.points, np.repeat(gt.points[-1:], extra, 0)])
    visible = np.concatenate([gt.visible, np.repeat(gt.visible[-1:], extra)])
    return Track(points=points, visible=visible, query=gt.query,
                 resolution=gt.resolution, video_id=gt.video_id)


def _build_denoiser(cfg: PipelineConfig, schedule: NoiseSchedule,
                    prep_padded: np.ndarray, gt: Track | None):
    kind = cfg.backend.kind
    if kind == "analytic":
        return AnalyticGaussianDenoiser(cfg.backend.mu, cfg.backend.sigma,
                                        schedule)
    if kind == "oracle":
        if gt is None:
            raise InvalidArgumentError(
                "oracle backend needs ground truth to build its targets")
        gt_padded = extend_track(gt, prep_padded.shape[0])
        with_marker, without = build_oracle_targets(prep_padded, gt_padded,
                                                    cfg.marker)
        return TrajectoryOracleDenoiser(
            video_to_unit(with_marker), video_to_unit(without), schedule,
            contamination=cfg.backend.contamination, drift=cfg.backend.drift)
    if kind == "remote":
        from .remote import RemoteDenoiser
        return RemoteDenoiser(cfg.backend.resolved_url())
    raise ConfigError(f"unknown backend kind {kind!r}")


def run_query(video: np.ndarray, query, cfg: PipelineConfig,
              gt: Track | None = None, denoiser=None, seed_seq=None,
              video_id: str = "") -> QueryResult:
    """Track one query point through one video.

    query is (u, v) in first-frame pixels. seed_seq (a SeedSequence) overrides
    the config seed; one child stream is spawned per generation pass so the
    coarse pass and every refinement round are independently reproducible.
    """
    video = np.asarray(video, dtype=np.uint8)
    h, w = video.shape[1:3]
    u, v = float(query[0]), float(query[1])
    if not (0 <= u <= w - 1 and 0 <= v <= h - 1):
        raise InvalidArgumentError(f"query ({u}, {v}) outside {w}x{h} frame")
    if cfg.preprocess_command:
        # external slot (e.g. an upscaler); query and gt follow the rescale
        video = run_preprocess_hook(video, cfg.preprocess_command)
        h2, w2 = video.shape[1:3]
        u, v = u * w2 / w, v * h2 / h
        if gt is not None and (h2, w2) != (h, w):
            from .metrics import rescale_track
            gt = rescale_track(gt, (h, w), (h2, w2))
        h, w = h2, w2

    schedule = NoiseSchedule.linear(cfg.sampler.num_steps)
    if seed_seq is None:
        seed_seq = np.random.SeedSequence(cfg.seed)
    pass_seeds = seed_seq.spawn(1 + cfg.refinement.rounds)

    prep = rebalance_colors(video, cfg.rebalance) if cfg.rebalance_enabled \
        else video.copy()
    marked = prep.copy()
    marked[0] = insert_marker(prep[0], (u, v), cfg.marker)
    marked_padded, orig_len = pad_video(marked)
    prep_padded, _ = pad_video(prep)

    cond_edited = Conditioning(frame=marked_padded[0], tag="edited")
    cond_unedited = Conditioning(frame=prep_padded[0], tag="unedited")
    if denoiser is None:
        denoiser = _build_denoiser(cfg, schedule, prep_padded, gt)

    x = sdedit_regenerate(video_to_unit(marked_padded), cond_edited,
                          cond_unedited, denoiser, schedule, cfg.sampler,
                          cfg.guidance, rng=pass_seeds[0])
    generated = truncate_video(unit_to_video(x), orig_len)
    coarse = track_video(generated, (0, u, v), cfg.tracker, video_id=video_id)

    ctx = RegenContext(denoiser=denoiser, schedule=schedule,
                       sampler=cfg.sampler, guidance=cfg.guidance,
                       cond_edited=cond_edited, cond_unedited=cond_unedited,
                       tracker_params=cfg.tracker,
                       round_seeds=list(pass_seeds[1:]),
                       original_length=orig_len)
    track, refined = refine_track(marked_padded, coarse, ctx, cfg.refinement)
    return QueryResult(track=track, coarse_track=coarse, generated=generated,
                       refined_video=refined)


def run_queries(video: np.ndarray, queries, cfg: PipelineConfig,
                gt: Track | None = None, video_id: str = "") -> list:
    """One generation per query ("one query point per video"); queries run
    concurrently up to cfg.workers, each with its own seed stream."""
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(queries))
    if cfg.workers <= 1 or len(queries) <= 1:
        return [run_query(video, q, cfg, gt=gt, seed_seq=s, video_id=video_id)
                for q, s in zip(queries, seeds)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [
            pool.submit(run_query, video, q, cfg, gt=gt, seed_seq=s,
                        video_id=video_id)
            for q, s in zip(queries, seeds)
        ]
        return [f.result() for f in futures]
