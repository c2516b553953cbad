"""Overlay rendering: tracked dot plus a short trajectory tail per frame.

The dot is omitted on frames where the tracker reports occlusion; the tail
(the last few positions, connected) is always drawn. Output frames are meant
for lossless PNG dumps, so everything is drawn with hard edges.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .tracker import Track

__all__ = ["render_overlay"]

TAIL_COLOR = (255, 220, 40)
RING_COLOR = (255, 255, 255)


def _draw_segment(frame, p0, p1, color):
    n = int(max(abs(p1[0] - p0[0]), abs(p1[1] - p0[1]))) * 2 + 1
    us = np.rint(np.linspace(p0[0], p1[0], n)).astype(int)
    vs = np.rint(np.linspace(p0[1], p1[1], n)).astype(int)
    h, w = frame.shape[:2]
    keep = (us >= 0) & (us < w) & (vs >= 0) & (vs < h)
    frame[vs[keep], us[keep]] = color


def render_overlay(video: np.ndarray, track: Track, tail: int = 5,
                   dot_radius: float = 3.0, dot_color=(255, 0, 0)) -> np.ndarray:
    out = np.asarray(video, dtype=np.uint8).copy()
    points = track.points
    for k in range(out.shape[0]):
        frame = out[k]
        start = max(0, k - tail)
        for j in range(start, k):
            _draw_segment(frame, points[j], points[j + 1], TAIL_COLOR)
        if track.visible[k]:
            frame = kernels.paint_disk(frame, points[k, 0], points[k, 1],
                                       dot_radius + 1.0, RING_COLOR)
            frame = kernels.paint_disk(frame, points[k, 0], points[k, 1],
                                       dot_radius, dot_color)
            out[k] = frame
    return out
