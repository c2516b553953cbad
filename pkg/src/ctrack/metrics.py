"""Track evaluation in the 256x256 reference frame: delta_avg, OA, AJ.

Semantics follow the point-tracking benchmark convention; the defining rules
(also implemented by the brute-force oracle in tests/reference_metrics.py and
written up in docs/metrics_oracle.md) are, per threshold tau:

  TP: gt visible  and pred visible and dist <= tau
  FN: gt visible  and (pred occluded or dist > tau)
  FP: pred visible and (gt occluded or dist > tau)
  Jaccard(tau) = TP / (TP + FP + FN), with 0/0 defined as 1.

A gt-visible, pred-visible frame at dist > tau counts as both FP and FN.
delta(tau) is the fraction of gt-visible frames with dist <= tau, ignoring
predicted visibility. Distances are real-valued; no rounding anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .tracker import Track

__all__ = [
    "THRESHOLDS",
    "MetricsReport",
    "rescale_track",
    "positional_accuracy",
    "occlusion_accuracy",
    "average_jaccard",
    "evaluate_track",
]

THRESHOLDS = (1.0, 2.0, 4.0, 8.0, 16.0)


@dataclass
class MetricsReport:
    aj: float
    delta_avg: float | None
    oa: float
    deltas: dict = field(default_factory=dict)     # tau -> delta
    jaccards: dict = field(default_factory=dict)   # tau -> jaccard
    counts: dict = field(default_factory=dict)     # tau -> (tp, fp, fn)

    def to_dict(self) -> dict:
        return {
            "aj": self.aj,
            "delta_avg": self.delta_avg,
            "oa": self.oa,
            "deltas": {str(t): d for t, d in self.deltas.items()},
            "jaccards": {str(t): j for t, j in self.jaccards.items()},
            "counts": {str(t): list(c) for t, c in self.counts.items()},
        }


def rescale_track(track: Track, from_resolution, to_resolution=(256, 256)) -> Track:
    """Scale coordinates per axis: u by to_W/from_W, v by to_H/from_H."""
    fh, fw = from_resolution
    th, tw = to_resolution
    if fh <= 0 or fw <= 0 or th <= 0 or tw <= 0:
        raise InvalidArgumentError("resolutions must be positive")
    points = track.points * np.array([tw / fw, th / fh])
    _, qu, qv = track.query
    return Track(points=points, visible=track.visible.copy(),
                 query=(track.query[0], qu * tw / fw, qv * th / fh),
                 resolution=(th, tw), video_id=track.video_id)


def _distances(pred_points, gt_points):
    pred_points = np.asarray(pred_points, dtype=np.float64)
    gt_points = np.asarray(gt_points, dtype=np.float64)
    if pred_points.shape != gt_points.shape:
        raise InvalidArgumentError(
            f"track length mismatch: {pred_points.shape} vs {gt_points.shape}")
    return np.sqrt(((pred_points - gt_points) ** 2).sum(axis=1))


def positional_accuracy(pred_points, gt_points, gt_visible,
                        thresholds=THRESHOLDS):
    """Per-threshold fraction of gt-visible frames within distance tau.

    Returns (deltas dict, delta_avg); with no gt-visible frames the result is
    not applicable and both are None.
    """
    gt_visible = np.asarray(gt_visible, dtype=bool)
    dist = _distances(pred_points, gt_points)
    n_vis = int(gt_visible.sum())
    if n_vis == 0:
        return {float(t): None for t in thresholds}, None
    deltas = {
        float(t): float((dist[gt_visible] <= t).sum() / n_vis)
        for t in thresholds
    }
    return deltas, float(np.mean(list(deltas.values())))


def occlusion_accuracy(pred_visible, gt_visible) -> float:
    """Fraction of frames where predicted visibility equals ground truth."""
    pred_visible = np.asarray(pred_visible, dtype=bool)
    gt_visible = np.asarray(gt_visible, dtype=bool)
    if pred_visible.shape != gt_visible.shape:
        raise InvalidArgumentError("visibility length mismatch")
    return float((pred_visible == gt_visible).mean())


def average_jaccard(pred_points, pred_visible, gt_points, gt_visible,
                    thresholds=THRESHOLDS):
    """Threshold-averaged TP / (TP + FP + FN).

    Returns (jaccards dict, aj, counts dict of (tp, fp, fn) per threshold).
    """
    pred_visible = np.asarray(pred_visible, dtype=bool)
    gt_visible = np.asarray(gt_visible, dtype=bool)
    dist = _distances(pred_points, gt_points)
    jaccards, counts = {}, {}
    for t in thresholds:
        within = dist <= t
        tp = int((gt_visible & pred_visible & within).sum())
        fp = int((pred_visible & (~gt_visible | ~within)).sum())
        fn = int((gt_visible & (~pred_visible | ~within)).sum())
        denom = tp + fp + fn
        jaccards[float(t)] = 1.0 if denom == 0 else tp / denom
        counts[float(t)] = (tp, fp, fn)
    aj = float(np.mean(list(jaccards.values())))
    return jaccards, aj, counts


def evaluate_track(pred: Track, gt: Track, thresholds=THRESHOLDS,
                   rescale_to=(256, 256)) -> MetricsReport:
    """Full report for one prediction against ground truth.

    Both tracks are rescaled from their own resolutions into the reference
    frame before distances are measured.
    """
    if len(pred) != len(gt):
        raise InvalidArgumentError(
            f"track length mismatch: {len(pred)} vs {len(gt)}")
    pred = rescale_track(pred, pred.resolution, rescale_to)
    gt = rescale_track(gt, gt.resolution, rescale_to)
    deltas, delta_avg = positional_accuracy(pred.points, gt.points,
                                            gt.visible, thresholds)
    oa = occlusion_accuracy(pred.visible, gt.visible)
    jaccards, aj, counts = average_jaccard(pred.points, pred.visible,
                                           gt.points, gt.visible, thresholds)
    return MetricsReport(aj=aj, delta_avg=delta_avg, oa=oa, deltas=deltas,
                         jaccards=jaccards, counts=counts)
