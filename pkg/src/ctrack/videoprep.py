"""Pre-generation video manipulation: rebalancing, marker insertion, padding.

Videos are uint8 ndarrays of shape (F, H, W, 3); the sampler consumes the
normalized view in [-1, 1] produced by video_to_unit. Points are (u, v) with
u the column (x) and v the row (y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .colorspace import hsv_to_rgb
from .errors import InvalidArgumentError

__all__ = [
    "MarkerSpec",
    "RebalanceParams",
    "video_to_unit",
    "unit_to_video",
    "rebalance_colors",
    "insert_marker",
    "pad_video",
    "truncate_video",
    "run_preprocess_hook",
]


@dataclass(frozen=True)
class MarkerSpec:
    """Circular dot with a reference hue at full saturation/value.

    Defaults: pure red (hue 0), radius 2. `hue=240` gives the blue variant of
    the marker-color ablation.
    """

    hue: float = 0.0
    radius: float = 2.0

    def __post_init__(self):
        if self.radius < 1:
            raise InvalidArgumentError(f"marker radius must be >= 1, got {self.radius}")

    @property
    def rgb(self) -> np.ndarray:
        return hsv_to_rgb(np.array([self.hue % 360.0, 255.0, 255.0]))


@dataclass(frozen=True)
class RebalanceParams:
    """Desaturation rule for pixels near the marker hue.

    A pixel is rebalanced when its hue lies in `window` (degrees, relative to
    `center_hue`, wrapped modulo 360) and its (S, V) falls inside the ellipse
    centered at (255, 255) with semi-axes (sat_axis, val_axis); its saturation
    is then capped at sat_cap.
    """

    center_hue: float = 0.0
    window: tuple = (-30.0, 10.0)
    sat_axis: float = 80.0
    val_axis: float = 30.0
    sat_cap: float = 80.0

    def __post_init__(self):
        if self.sat_axis <= 0 or self.val_axis <= 0:
            raise InvalidArgumentError("ellipse semi-axes must be positive")
        if not 0 <= self.sat_cap <= 255:
            raise InvalidArgumentError("sat_cap must be in [0, 255]")

    @property
    def hue_bounds(self) -> tuple:
        return (self.center_hue + self.window[0],
                self.center_hue + self.window[1])


def video_to_unit(video: np.ndarray) -> np.ndarray:
    """uint8 [0, 255] -> float64 [-1, 1]."""
    return np.asarray(video, dtype=np.float64) / 127.5 - 1.0


def unit_to_video(x: np.ndarray) -> np.ndarray:
    """float [-1, 1] -> uint8, clipping out-of-range values."""
    return np.clip(np.rint((x + 1.0) * 127.5), 0, 255).astype(np.uint8)


def rebalance_colors(video: np.ndarray,
                     params: RebalanceParams = RebalanceParams()) -> np.ndarray:
    """Suppress natural occurrences of the marker color (idempotent)."""
    video = np.asarray(video, dtype=np.uint8)
    lo, hi = params.hue_bounds
    out = np.empty_like(video)
    for k in range(video.shape[0]):
        out[k] = kernels.rebalance_frame(video[k], lo, hi, params.sat_axis,
                                         params.val_axis, params.sat_cap)
    return out


def insert_marker(frame: np.ndarray, point, spec: MarkerSpec = MarkerSpec()) -> np.ndarray:
    """Draw the marker disk centered at (u, v); hard edges, clipped at borders.

    The point itself must lie inside the frame; the disk may be clipped.
    """
    h, w = frame.shape[:2]
    u, v = float(point[0]), float(point[1])
    if not (0 <= u <= w - 1 and 0 <= v <= h - 1):
        raise InvalidArgumentError(
            f"marker point ({u}, {v}) outside frame bounds {w}x{h}")
    return kernels.paint_disk(frame, u, v, spec.radius, spec.rgb)


def pad_video(video: np.ndarray) -> tuple:
    """Repeat the last frame until the count is congruent to 1 mod 4.

    Returns (padded, original_length); truncate_video undoes the padding.
    """
    f = video.shape[0]
    if f < 1:
        raise InvalidArgumentError("video must have at least one frame")
    extra = (4 - (f - 1) % 4) % 4
    if extra == 0:
        return video.copy(), f
    tail = np.repeat(video[-1:], extra, axis=0)
    return np.concatenate([video, tail], axis=0), f


def truncate_video(video: np.ndarray, original_length: int) -> np.ndarray:
    return video[:original_length].copy()


def run_preprocess_hook(video: np.ndarray, command: str) -> np.ndarray:
    """Pass the video through an external executable (e.g. an upscaler).

    The command (split shell-style, so arguments are allowed) is invoked as
    `<command> <input.raw> <output.raw>` with both files in the raw tensor
    format; the executable owns whatever it does in between (upscaling is
    deliberately not implemented here). The returned video may have a
    different resolution.
    """
    import shlex
    import subprocess
    import tempfile
    from pathlib import Path

    from .video_io import read_raw_video, write_raw_video

    with tempfile.TemporaryDirectory(prefix="ctrack_hook_") as tmp:
        src = Path(tmp) / "input.raw"
        dst = Path(tmp) / "output.raw"
        write_raw_video(src, video)
        result = subprocess.run(shlex.split(command) + [str(src), str(dst)],
                                capture_output=True, text=True)
        if result.returncode != 0:
            raise InvalidArgumentError(
                f"preprocess hook {command!r} failed "
                f"({result.returncode}): {result.stderr.strip()}")
        if not dst.exists():
            raise InvalidArgumentError(
                f"preprocess hook {command!r} produced no output")
        return read_raw_video(dst)
