"""Coarse-to-fine correction: inpaint inside a tube around the initial track.

The tube mask frees only a disk around each frame's tracked location (held
position on occluded frames); re-generating under the inpainting constraint
pins everything else to the input, then the tracker runs again on the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .diffusion import inpaint_regenerate
from .errors import InvalidArgumentError
from .tracker import Track, track_video
from .videoprep import truncate_video, unit_to_video, video_to_unit

__all__ = ["RefinementParams", "RegenContext", "build_mask",
           "downsample_mask", "refine_track"]


@dataclass(frozen=True)
class RefinementParams:
    """Tube radius (pixels, must exceed the marker radius) and round count."""

    radius: float = 40.0
    rounds: int = 1

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidArgumentError("tube radius must be positive")
        if self.rounds < 0:
            raise InvalidArgumentError("rounds must be >= 0")


@dataclass
class RegenContext:
    """Everything a regeneration pass needs besides the video itself.

    round_seeds supplies one rng seed (int or SeedSequence) per refinement
    round so repeated runs are reproducible.
    """

    denoiser: object
    schedule: object
    sampler: object
    guidance: object
    cond_edited: object
    cond_unedited: object
    tracker_params: object
    round_seeds: list
    original_length: int


def build_mask(track, radius: float, dims) -> np.ndarray:
    """Spatiotemporal tube: frame k's mask is the disk around the track point.

    `track` may be a Track or an (F, 2) points array; track length must equal
    dims[0]. Occluded frames contribute a disk at the held position, which is
    what the tracker stores there.
    """
    points = track.points if isinstance(track, Track) else np.asarray(track)
    f, h, w = dims
    if len(points) != f:
        raise InvalidArgumentError(
            f"track length {len(points)} != frame count {f}")
    mask = np.zeros((f, h, w), dtype=bool)
    for k in range(f):
        mask[k] = kernels.disk_mask(h, w, points[k, 0], points[k, 1], radius)
    return mask


def downsample_mask(mask: np.ndarray, factor: int) -> np.ndarray:
    """Any-coverage (logical OR) pooling by an integer spatial factor.

    For backends with a spatially compressed latent, a latent cell is freed
    whenever any pixel it covers lies in the tube — conservative: the frozen
    region never intersects the tube.
    """
    mask = np.asarray(mask, dtype=bool)
    f, h, w = mask.shape
    if factor < 1 or h % factor or w % factor:
        raise InvalidArgumentError(
            f"spatial factor {factor} does not divide {h}x{w}")
    blocks = mask.reshape(f, h // factor, factor, w // factor, factor)
    return blocks.any(axis=(2, 4))


def _extend_points(points: np.ndarray, length: int) -> np.ndarray:
    if len(points) >= length:
        return points[:length]
    tail = np.repeat(points[-1:], length - len(points), axis=0)
    return np.concatenate([points, tail], axis=0)


def refine_track(video_padded: np.ndarray, initial_track: Track,
                 ctx: RegenContext, params: RefinementParams):
    """Iteratively re-generate inside the tube and re-track.

    `video_padded` is the preprocessed, marker-inserted, padded uint8 input
    the coarse pass was generated from. Each round rebuilds the mask from the
    latest track (extended to the padded length by repeating the last entry).
    Returns (track, refined_video); rounds=0 returns the input track and None.
    """
    if params.rounds > len(ctx.round_seeds):
        raise InvalidArgumentError(
            f"{params.rounds} rounds but only {len(ctx.round_seeds)} seeds")
    track = initial_track
    refined = None
    f, h, w = video_padded.shape[:3]
    x0 = video_to_unit(video_padded)
    for r in range(params.rounds):
        points = _extend_points(track.points, f)
        mask = build_mask(points, params.radius, (f, h, w))
        x = inpaint_regenerate(x0, mask, ctx.cond_edited, ctx.cond_unedited,
                               ctx.denoiser, ctx.schedule, ctx.sampler,
                               ctx.guidance, rng=ctx.round_seeds[r])
        refined = truncate_video(unit_to_video(x), ctx.original_length)
        track = track_video(refined, track.query, ctx.tracker_params,
                            video_id=track.video_id)
    return track, refined
