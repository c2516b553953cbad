"""Command-line entry points: track, evaluate, synthesize, diagnose.

Everything that affects results lives in the JSON config file; flags select
configs and paths only. Outputs are deterministic given config + seed, so
re-running a command reproduces its JSON byte for byte. Exit codes: 0 ok,
2 bad input, 3 backend failure, 4 config/validation failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .config import load_config
from .errors import BackendError, ConfigError, InvalidArgumentError
from .metrics import evaluate_track
from .pipeline import run_queries
from .synthetic import make_suite, write_suite
from .tracker import Track
from .video_io import read_video, write_png_frames
from .viz import render_overlay

EXIT_BAD_INPUT = 2
EXIT_BACKEND = 3
EXIT_VALIDATION = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _run(fn):
    try:
        fn()
    except ConfigError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except BackendError as exc:
        _fail(EXIT_BACKEND, str(exc))
    except (InvalidArgumentError, FileNotFoundError) as exc:
        _fail(EXIT_BAD_INPUT, str(exc))


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


@click.group()
def main():
    """Point tracking by prompting a video diffusion sampler."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--video", "video_path", required=True, type=click.Path())
@click.option("--query", "queries", multiple=True, required=True,
              help="query point 'u,v' in first-frame pixels; repeatable")
@click.option("--gt", "gt_path", type=click.Path(), default=None,
              help="ground-truth JSON for the oracle backend "
                   "(default: gt.json next to the video)")
@click.option("--out", "out_dir", type=click.Path(), default="ctrack_out")
def track(config_path, video_path, queries, gt_path, out_dir):
    """Generate, track and refine one video for each query point."""

    def body():
        cfg = load_config(config_path)
        video = read_video(video_path)
        parsed = []
        for q in queries:
            try:
                u, v = (float(x) for x in q.split(","))
            except ValueError:
                raise InvalidArgumentError(f"bad query {q!r}, expected 'u,v'")
            parsed.append((u, v))
        gt = None
        if cfg.backend.kind == "oracle":
            path = Path(gt_path) if gt_path else _default_gt_path(video_path)
            if not path.exists():
                raise InvalidArgumentError(
                    f"oracle backend needs ground truth; {path} not found")
            gt = Track.load(path)
        video_id = Path(video_path).parent.name \
            if Path(video_path).name == "video.raw" else Path(video_path).stem
        results = run_queries(video, parsed, cfg, gt=gt, video_id=video_id)
        out = Path(out_dir) / video_id
        for i, res in enumerate(results):
            _write_json(out / f"track_q{i}.json", res.track.to_dict())
            overlay = render_overlay(res.refined_video if res.refined_video
                                     is not None else res.generated,
                                     res.track,
                                     dot_color=tuple(cfg.marker.rgb))
            write_png_frames(out / f"overlay_q{i}", overlay)
        click.echo(f"wrote {len(results)} track(s) to {out}")

    _run(body)


def _default_gt_path(video_path) -> Path:
    p = Path(video_path)
    base = p if p.is_dir() else p.parent
    return base / "gt.json"


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
def synthesize(config_path, out_dir):
    """Generate a synthetic suite with exact ground truth."""

    def body():
        cfg = load_config(config_path)
        cases = make_suite(cfg.synth.n, cfg.synth.preset,
                           resolution=cfg.synth.resolution,
                           num_frames=cfg.synth.num_frames,
                           seed=cfg.synth.seed)
        write_suite(cases, out_dir)
        click.echo(f"wrote {len(cases)} case(s) to {out_dir}")

    _run(body)


def _collect_tracks(directory: Path, filenames) -> dict:
    """id -> Track. Accepts flat <id>.json files or <id>/<filename> layouts;
    earlier filenames take precedence within a case directory."""
    found = {}
    for p in sorted(directory.glob("*.json")):
        if p.name == "manifest.json":
            continue
        found[p.stem] = Track.load(p)
    for name in filenames:
        for p in sorted(directory.glob(f"*/{name}")):
            found.setdefault(p.parent.name, Track.load(p))
    return found


@main.command()
@click.option("--pred", "pred_dir", required=True, type=click.Path())
@click.option("--gt", "gt_dir", required=True, type=click.Path())
@click.option("--out", "out_path", type=click.Path(), default=None)
def evaluate(pred_dir, gt_dir, out_path):
    """Score predicted tracks against ground truth in the 256x256 frame."""

    def body():
        preds = _collect_tracks(Path(pred_dir),
                                ("track.json", "track_q0.json", "gt.json"))
        gts = _collect_tracks(Path(gt_dir), ("gt.json",))
        if not preds or not gts:
            raise InvalidArgumentError("empty prediction or ground-truth directory")
        shared = sorted(set(preds) & set(gts))
        skipped = sorted(set(preds) ^ set(gts))
        rows = []
        for vid in shared:
            report = evaluate_track(preds[vid], gts[vid])
            rows.append({"id": vid, **report.to_dict()})
        mean = {
            key: float(np.mean([r[key] for r in rows if r[key] is not None]))
            for key in ("aj", "delta_avg", "oa")
        } if rows else {}
        payload = {"schema": 1, "videos": rows, "mean": mean,
                   "skipped": skipped}
        text = json.dumps(payload, sort_keys=True, indent=2)
        if out_path:
            _write_json(Path(out_path), payload)
        click.echo(text)
        if skipped:
            _fail(EXIT_BAD_INPUT,
                  f"{len(skipped)} id(s) missing a counterpart: {skipped}")

    _run(body)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", type=click.Path(), default=None)
def diagnose(config_path, out_path):
    """Moment checks and a guidance-weight sweep (oracle backends only)."""

    def body():
        from .diagnostics import run_diagnostics

        cfg = load_config(config_path)
        if cfg.backend.kind == "remote":
            raise ConfigError("diagnostics require an analytic or oracle "
                              "backend, not remote")
        payload = run_diagnostics(cfg)
        text = json.dumps(payload, sort_keys=True, indent=2)
        if out_path:
            _write_json(Path(out_path), payload)
        click.echo(text)

    _run(body)


if __name__ == "__main__":
    main()
