"""Desk-scale scene generator with exact ground truth and oracle targets.

Scenes are (F, H, W, 3) uint8 videos: an achromatic textured background,
solid moving sprites, optional occluder rectangles drawn on top, and (for the
distractor preset) vivid red patches that exercise color rebalancing. The
query point rides a sprite center; sprite paths are designed to be
integer-valued at every frame so the rendered marker disk is lattice-symmetric
and blob averaging recovers the center exactly (see the ground-truth note in
the package docs). Ground-truth visibility is the analytic point-in-rectangle
test against the occluders.

Oracle targets: `build_oracle_targets(prep, gt, marker)` returns the pair
(with-marker, without-marker) used by TrajectoryOracleDenoiser — the
with-marker target renders the dot at the ground-truth position in every
visible frame and omits it during occlusion, mirroring how a generator that
understands object permanence would behave.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .tracker import Track
from .videoprep import MarkerSpec, insert_marker

__all__ = [
    "SpriteSpec",
    "OccluderSpec",
    "SceneConfig",
    "SyntheticCase",
    "generate_scene",
    "make_suite",
    "build_oracle_targets",
    "write_case",
    "read_case",
    "write_suite",
    "read_suite",
    "PRESETS",
]


@dataclass
class SpriteSpec:
    path: np.ndarray          # (F, 2) float64 (u, v), integer-valued
    half_size: int = 3        # solid square, side 2*half_size+1
    color: tuple = (40, 80, 200)


@dataclass
class OccluderSpec:
    rects: np.ndarray         # (F, 4) float64 (u0, v0, u1, v1), inclusive
    color: tuple = (55, 55, 55)


@dataclass
class SceneConfig:
    resolution: tuple = (64, 64)
    num_frames: int = 17
    sprites: list = field(default_factory=list)
    occluders: list = field(default_factory=list)
    distractors: list = field(default_factory=list)  # (u0, v0, u1, v1) red rects
    query_sprite: int = 0
    background_range: tuple = (195, 235)
    seed: int = 0

    def __post_init__(self):
        if self.num_frames < 2:
            raise InvalidArgumentError("scenes need at least 2 frames")


@dataclass
class SyntheticCase:
    case_id: str
    preset: str
    video: np.ndarray   # scene without any marker
    gt: Track
    config: SceneConfig


DISTRACTOR_RED = (255, 30, 30)


def _draw_rect(frame, u0, v0, u1, v1, color):
    h, w = frame.shape[:2]
    u0, u1 = max(0, int(u0)), min(w - 1, int(u1))
    v0, v1 = max(0, int(v0)), min(h - 1, int(v1))
    if u0 <= u1 and v0 <= v1:
        frame[v0:v1 + 1, u0:u1 + 1] = color


def generate_scene(config: SceneConfig, seed: int | None = None) -> SyntheticCase:
    """Render the scene and compute its analytic ground truth.

    Deterministic for a fixed seed (defaults to config.seed).
    """
    if seed is None:
        seed = config.seed
    h, w = config.resolution
    f = config.num_frames
    if not config.sprites:
        raise InvalidArgumentError("scene needs at least one sprite")

    for sprite in config.sprites:
        path = np.asarray(sprite.path, dtype=np.float64)
        if path.shape != (f, 2):
            raise InvalidArgumentError(
                f"sprite path shape {path.shape} != ({f}, 2)")
        if (path[:, 0].min() < 0 or path[:, 0].max() > w - 1
                or path[:, 1].min() < 0 or path[:, 1].max() > h - 1):
            raise InvalidArgumentError("sprite trajectory leaves the frame")

    rng = np.random.default_rng(seed)
    lo, hi = config.background_range
    gray = rng.integers(lo, hi + 1, size=(h, w), dtype=np.int64).astype(np.uint8)
    background = np.stack([gray, gray, gray], axis=-1)

    video = np.empty((f, h, w, 3), dtype=np.uint8)
    for k in range(f):
        frame = background.copy()
        for rect in config.distractors:
            _draw_rect(frame, *rect, DISTRACTOR_RED)
        for sprite in config.sprites:
            u, v = sprite.path[k]
            s = sprite.half_size
            _draw_rect(frame, u - s, v - s, u + s, v + s, sprite.color)
        for occ in config.occluders:
            _draw_rect(frame, *occ.rects[k], occ.color)
        video[k] = frame

    qpath = np.asarray(config.sprites[config.query_sprite].path, np.float64)
    visible = np.ones(f, dtype=bool)
    for occ in config.occluders:
        u0, v0, u1, v1 = occ.rects.T
        inside = ((qpath[:, 0] >= u0) & (qpath[:, 0] <= u1)
                  & (qpath[:, 1] >= v0) & (qpath[:, 1] <= v1))
        visible &= ~inside

    gt = Track(points=qpath.copy(), visible=visible,
               query=(0, float(qpath[0, 0]), float(qpath[0, 1])),
               resolution=(h, w))
    return SyntheticCase(case_id=f"case_{seed:04d}", preset="custom",
                         video=video, gt=gt, config=config)


def build_oracle_targets(prep_video: np.ndarray, gt: Track,
                         marker: MarkerSpec = MarkerSpec()):
    """(with-marker, without-marker) clean targets for the trajectory oracle.

    The inputs are the pipeline's *preprocessed* video (so an ablation that
    skips rebalancing gets targets that retain natural reds) and the case's
    ground truth; the marker is drawn at the ground-truth position of every
    visible frame.
    """
    if prep_video.shape[0] != len(gt):
        raise InvalidArgumentError(
            f"video has {prep_video.shape[0]} frames but gt has {len(gt)}")
    without = prep_video.copy()
    with_marker = prep_video.copy()
    for k in range(len(gt)):
        if gt.visible[k]:
            with_marker[k] = insert_marker(with_marker[k], gt.points[k], marker)
    return with_marker, without


# ---------------------------------------------------------------------------
# presets

def _linear_path(f, start, velocity):
    steps = np.arange(f, dtype=np.float64)[:, None]
    return np.asarray(start, np.float64) + steps * np.asarray(velocity, np.float64)


def _make_linear(f, res, rng):
    h, w = res
    u0 = int(rng.integers(6, 12))
    v0 = int(rng.integers(14, h - 14))
    du = int(rng.integers(2, 4))
    dv = int(rng.choice([-1, 0, 1]))
    u_end, v_end = u0 + du * (f - 1), v0 + dv * (f - 1)
    if not (4 <= u_end <= w - 5 and 4 <= v_end <= h - 5):
        du, dv = 2, 0
    return SceneConfig(resolution=res, num_frames=f, sprites=[
        SpriteSpec(path=_linear_path(f, (u0, v0), (du, dv)),
                   color=(40, 80, 200)),
    ])


def _make_curved(f, res, rng):
    h, w = res
    u0 = int(rng.integers(6, 10))
    v0 = int(rng.integers(h // 2 - 6, h // 2 + 6))
    amp = int(rng.integers(4, 9))
    steps = np.arange(f)
    u = u0 + 3.0 * steps
    v = v0 + np.rint(amp * np.sin(2.0 * np.pi * steps / (f - 1)))
    return SceneConfig(resolution=res, num_frames=f, sprites=[
        SpriteSpec(path=np.stack([u, v], axis=1), color=(60, 160, 70)),
    ])


def _make_occlusion(f, res, rng, distractor=False):
    h, w = res
    v0 = int(rng.integers(18, h - 18))
    path = _linear_path(f, (8, v0), (3, 0))
    strip = np.tile(np.array([28.0, 0.0, 36.0, h - 1.0]), (f, 1))
    distractors = []
    if distractor:
        # red patch outside the occluder strip but inside the search radius
        # of the held position during the occlusion interval
        side = -1 if v0 > h // 2 else 1
        vc = v0 + side * 7
        distractors = [(22, vc - 1, 24, vc + 1)]
    return SceneConfig(resolution=res, num_frames=f, sprites=[
        SpriteSpec(path=path, color=(40, 80, 200)),
    ], occluders=[OccluderSpec(rects=strip)], distractors=distractors)


def _make_boundary(f, res, rng):
    h, w = res
    edge = int(rng.integers(3, 6))
    top = bool(rng.integers(0, 2))
    v = float(edge if top else h - 1 - edge)
    path = _linear_path(f, (6, v), (3, 0))
    return SceneConfig(resolution=res, num_frames=f, sprites=[
        SpriteSpec(path=path, half_size=2, color=(150, 90, 200)),
    ])


def _make_contamination(f, res, rng):
    h, w = res
    v0 = int(rng.integers(20, h - 20))
    return SceneConfig(resolution=res, num_frames=f, sprites=[
        SpriteSpec(path=_linear_path(f, (10, v0), (2, 1)),
                   color=(210, 210, 210)),
    ])


PRESETS = {
    "linear": _make_linear,
    "curved": _make_curved,
    "occlusion": _make_occlusion,
    "boundary": _make_boundary,
    "distractor": lambda f, res, rng: _make_occlusion(f, res, rng, True),
    "contamination": _make_contamination,
}
_MIXED_CYCLE = ("linear", "curved", "occlusion", "boundary", "distractor")


def make_suite(n: int, preset: str = "mixed", resolution=(64, 64),
               num_frames: int = 17, seed: int = 0) -> list:
    """n deterministic cases; preset "mixed" cycles the five scene families."""
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    if preset != "mixed" and preset not in PRESETS:
        raise InvalidArgumentError(f"unknown preset {preset!r}")
    cases = []
    for i in range(n):
        name = _MIXED_CYCLE[i % len(_MIXED_CYCLE)] if preset == "mixed" else preset
        case_seed = seed * 100003 + i
        rng = np.random.default_rng(case_seed)
        config = PRESETS[name](num_frames, resolution, rng)
        config.seed = case_seed
        case = generate_scene(config)
        case.case_id = f"{name}_{i:03d}"
        case.preset = name
        case.gt.video_id = case.case_id
        cases.append(case)
    return cases


# ---------------------------------------------------------------------------
# on-disk layout: <out>/<case_id>/{video.raw, gt.json, case.json}

def write_case(case: SyntheticCase, directory) -> None:
    from .video_io import write_raw_video

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_raw_video(directory / "video.raw", case.video)
    case.gt.save(directory / "gt.json")
    meta = {
        "schema": 1,
        "id": case.case_id,
        "preset": case.preset,
        "seed": case.config.seed,
        "resolution": list(case.config.resolution),
        "num_frames": case.config.num_frames,
        "query": [0, float(case.gt.points[0, 0]), float(case.gt.points[0, 1])],
    }
    (directory / "case.json").write_text(
        json.dumps(meta, sort_keys=True, indent=2))


def read_case(directory) -> SyntheticCase:
    from .video_io import read_raw_video

    directory = Path(directory)
    meta = json.loads((directory / "case.json").read_text())
    video = read_raw_video(directory / "video.raw")
    gt = Track.load(directory / "gt.json")
    config = SceneConfig(resolution=tuple(meta["resolution"]),
                         num_frames=meta["num_frames"],
                         sprites=[SpriteSpec(path=gt.points.copy())],
                         seed=meta["seed"])
    return SyntheticCase(case_id=meta["id"], preset=meta["preset"],
                         video=video, gt=gt, config=config)


def write_suite(cases: list, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"schema": 1, "cases": []}
    for case in cases:
        write_case(case, directory / case.case_id)
        manifest["cases"].append({
            "id": case.case_id,
            "preset": case.preset,
            "seed": case.config.seed,
            "path": case.case_id,
        })
    (directory / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2))


def read_suite(directory) -> list:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    return [read_case(directory / entry["path"]) for entry in manifest["cases"]]
