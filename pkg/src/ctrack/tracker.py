"""Color-threshold marker tracker with local search and occlusion recovery.

Per frame, marker-colored pixels are collected inside a disk of radius r
around the previous position; the detection closest to the previous position
anchors a blob average. On a miss the position is held, the frame is marked
occluded, and r grows by the expansion factor (capped) until the marker
reappears, after which r resets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels
from .colorspace import rgb_to_lab
from .errors import InvalidArgumentError

__all__ = ["TrackerParams", "TrackState", "Track",
           "detect_red_pixels", "track_frame", "track_video"]


@dataclass(frozen=True)
class TrackerParams:
    """Detection thresholds and search-radius policy.

    The HSV box is (marker_hue + hue_window) x sat_range x val_range, bounds
    inclusive, hue wrapped modulo 360. Radii are in pixels at the resolution
    being tracked; `scaled_for` derives desk-scale values from these
    generation-resolution defaults.
    """

    marker_hue: float = 0.0
    hue_window: tuple = (-10.0, 5.0)
    sat_range: tuple = (150.0, 255.0)
    val_range: tuple = (150.0, 255.0)
    search_radius: float = 90.0
    max_search_radius: float = 150.0
    expansion: float = 1.1
    averaging_radius: float = 20.0
    color_space: str = "hsv"
    # LAB-mode thresholds (color-space ablation); box on (L, a, b)
    lab_l_range: tuple = (20.0, 95.0)
    lab_a_min: float = 40.0
    lab_b_min: float = 20.0

    def __post_init__(self):
        if self.search_radius > self.max_search_radius:
            raise InvalidArgumentError("search_radius must be <= max_search_radius")
        if self.expansion <= 1.0:
            raise InvalidArgumentError("expansion factor must be > 1")
        if self.color_space not in ("hsv", "lab"):
            raise InvalidArgumentError(f"unknown color space {self.color_space!r}")

    @classmethod
    def scaled_for(cls, resolution, reference: float = 480.0,
                   marker_radius: float = 2.0, **overrides) -> "TrackerParams":
        """Scale the search radii to a different working resolution.

        Rule: radii scale by min(H, W) / reference; the averaging radius is
        floored at marker diameter + 1 so the blob average always covers the
        whole disk (exact center recovery).
        """
        h, w = resolution
        s = min(h, w) / reference
        defaults = cls()
        params = dict(
            search_radius=defaults.search_radius * s,
            max_search_radius=defaults.max_search_radius * s,
            averaging_radius=max(defaults.averaging_radius * s,
                                 2.0 * marker_radius + 1.0),
        )
        params.update(overrides)
        return cls(**params)


@dataclass(frozen=True)
class TrackState:
    position: tuple  # (u, v)
    search_radius: float
    occluded: bool = False


@dataclass
class Track:
    """Per-frame positions and visibility, plus query provenance.

    points is (F, 2) float64 in (u, v); entry 0 equals the query point.
    """

    points: np.ndarray
    visible: np.ndarray
    query: tuple  # (frame, u, v)
    resolution: tuple  # (H, W)
    video_id: str = ""

    def __len__(self):
        return len(self.points)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "video_id": self.video_id,
            "query": [int(self.query[0]), float(self.query[1]), float(self.query[2])],
            "resolution": [int(self.resolution[0]), int(self.resolution[1])],
            "points": [[float(u), float(v)] for u, v in self.points],
            "visible": [bool(b) for b in self.visible],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Track":
        return cls(
            points=np.asarray(d["points"], dtype=np.float64),
            visible=np.asarray(d["visible"], dtype=bool),
            query=(int(d["query"][0]), float(d["query"][1]), float(d["query"][2])),
            resolution=(int(d["resolution"][0]), int(d["resolution"][1])),
            video_id=d.get("video_id", ""),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2))

    @classmethod
    def load(cls, path) -> "Track":
        return cls.from_dict(json.loads(Path(path).read_text()))


def detect_red_pixels(frame: np.ndarray, center, radius: float,
                      params: TrackerParams = TrackerParams()) -> np.ndarray:
    """All marker-colored pixels within `radius` of `center`, as (N, 2) (u, v)
    in row-major scan order. An empty result is a valid outcome."""
    if radius <= 0:
        raise InvalidArgumentError(f"search radius must be > 0, got {radius}")
    cu, cv = float(center[0]), float(center[1])
    if params.color_space == "hsv":
        return kernels.detect_in_disk(
            frame, cu, cv, radius,
            params.marker_hue + params.hue_window[0],
            params.marker_hue + params.hue_window[1],
            params.sat_range[0], params.sat_range[1],
            params.val_range[0], params.val_range[1])
    return _detect_lab(frame, cu, cv, radius, params)


def _detect_lab(frame, cu, cv, radius, params):
    h_img, w_img = frame.shape[:2]
    uu, vv = np.meshgrid(np.arange(w_img), np.arange(h_img))
    near = (uu - cu) ** 2 + (vv - cv) ** 2 <= radius ** 2
    lab = rgb_to_lab(frame)
    l, a, b = lab[..., 0], lab[..., 1], lab[..., 2]
    hit = (near & (l >= params.lab_l_range[0]) & (l <= params.lab_l_range[1])
           & (a >= params.lab_a_min) & (b >= params.lab_b_min))
    vs, us = np.nonzero(hit)
    return np.stack([us, vs], axis=1).astype(np.int64)


def track_frame(state: TrackState, frame: np.ndarray,
                params: TrackerParams = TrackerParams()):
    """Advance the tracker by one frame; returns (point, visible, new_state).

    Tie-breaking among equidistant detections follows row-major scan order.
    """
    detections = detect_red_pixels(frame, state.position,
                                   state.search_radius, params)
    if len(detections) == 0:
        radius = min(state.search_radius * params.expansion,
                     params.max_search_radius)
        new_state = replace(state, search_radius=radius, occluded=True)
        return np.asarray(state.position, dtype=np.float64), False, new_state

    pos = np.asarray(state.position, dtype=np.float64)
    d2 = ((detections - pos) ** 2).sum(axis=1)
    anchor = detections[int(np.argmin(d2))]
    near_anchor = ((detections - anchor) ** 2).sum(axis=1) \
        <= params.averaging_radius ** 2
    point = detections[near_anchor].mean(axis=0)
    new_state = TrackState(position=(float(point[0]), float(point[1])),
                           search_radius=params.search_radius, occluded=False)
    return point, True, new_state


def track_video(video: np.ndarray, query,
                params: TrackerParams = TrackerParams(),
                video_id: str = "") -> Track:
    """Track the marker through the whole video from a first-frame query.

    query is (frame, u, v) with frame == 0 (first-frame protocol). Entry 0 of
    the result is the query point itself, marked visible.
    """
    video = np.asarray(video)
    if video.ndim != 4 or video.shape[0] < 1:
        raise InvalidArgumentError("video must be a non-empty (F, H, W, 3) array")
    t0, u0, v0 = int(query[0]), float(query[1]), float(query[2])
    if t0 != 0:
        raise InvalidArgumentError("only first-frame queries are supported")
    f, h, w = video.shape[:3]
    if not (0 <= u0 <= w - 1 and 0 <= v0 <= h - 1):
        raise InvalidArgumentError(f"query ({u0}, {v0}) outside {w}x{h} frame")

    points = np.zeros((f, 2), dtype=np.float64)
    visible = np.zeros(f, dtype=bool)
    points[0] = (u0, v0)
    visible[0] = True
    state = TrackState(position=(u0, v0), search_radius=params.search_radius)
    for k in range(1, f):
        point, vis, state = track_frame(state, video[k], params)
        points[k] = point
        visible[k] = vis
    return Track(points=points, visible=visible, query=(t0, u0, v0),
                 resolution=(h, w), video_id=video_id)
