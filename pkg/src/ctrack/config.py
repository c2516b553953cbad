"""Pipeline configuration: one JSON file controls everything that affects
results; command-line flags only select configs and paths.

Schema (all sections optional, defaults shown by `default_config_dict`):

    {
      "schema": 1,
      "seed": 0,
      "workers": 1,
      "backend": {"kind": "oracle" | "analytic" | "remote", "url": ...,
                   "mu": 0.0, "sigma": 1.0, "contamination": 0.0,
                   "drift": null},
      "sampler": {"gamma": 0.5, "num_steps": 50, "sigma_mode": "beta"},
      "guidance": {"lambda": 8.0},
      "marker": {"hue": 0.0, "radius": 2},
      "rebalance": {"enabled": true, "center_hue": 0.0,
                     "window": [-30.0, 10.0], "sat_axis": 80.0,
                     "val_axis": 30.0, "sat_cap": 80.0},
      "tracker": {"search_radius": 90.0, "max_search_radius": 150.0,
                   "expansion": 1.1, "averaging_radius": 20.0,
                   "color_space": "hsv", "hue_window": [-10.0, 5.0],
                   "sat_range": [150.0, 255.0], "val_range": [150.0, 255.0]},
      "refinement": {"radius": 40.0, "rounds": 1},
      "synth": {"n": 20, "preset": "mixed", "resolution": [64, 64],
                 "num_frames": 17, "seed": 0}
    }
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .diffusion import GuidanceConfig, SamplerConfig
from .errors import ConfigError, InvalidArgumentError
from .refinement import RefinementParams
from .tracker import TrackerParams
from .videoprep import MarkerSpec, RebalanceParams

__all__ = ["BackendConfig", "SynthConfig", "PipelineConfig",
           "load_config", "desk_config"]

REMOTE_ENDPOINT_ENV = "CTRACK_REMOTE_ENDPOINT"


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "oracle"
    url: str | None = None
    mu: float = 0.0
    sigma: float = 1.0
    contamination: float = 0.0
    drift: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("analytic", "oracle", "remote"):
            raise ConfigError(f"unknown backend kind {self.kind!r}")

    def resolved_url(self) -> str:
        url = os.environ.get(REMOTE_ENDPOINT_ENV) or self.url
        if not url:
            raise ConfigError("remote backend requires a url "
                              f"(config or ${REMOTE_ENDPOINT_ENV})")
        return url


@dataclass(frozen=True)
class SynthConfig:
    n: int = 20
    preset: str = "mixed"
    resolution: tuple = (64, 64)
    num_frames: int = 17
    seed: int = 0


@dataclass
class PipelineConfig:
    backend: BackendConfig = field(default_factory=BackendConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    guidance: GuidanceConfig = field(default_factory=GuidanceConfig)
    marker: MarkerSpec = field(default_factory=MarkerSpec)
    rebalance: RebalanceParams = field(default_factory=RebalanceParams)
    rebalance_enabled: bool = True
    tracker: TrackerParams = field(default_factory=TrackerParams)
    refinement: RefinementParams = field(default_factory=RefinementParams)
    synth: SynthConfig = field(default_factory=SynthConfig)
    preprocess_command: str | None = None
    seed: int = 0
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        try:
            return cls._from_dict(d)
        except (InvalidArgumentError, TypeError, KeyError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def _from_dict(cls, d: dict) -> "PipelineConfig":
        if d.get("schema", 1) != 1:
            raise ConfigError(f"unsupported config schema {d.get('schema')!r}")
        backend = d.get("backend", {})
        drift = backend.get("drift")
        sampler = d.get("sampler", {})
        guidance = d.get("guidance", {})
        marker = d.get("marker", {})
        reb = dict(d.get("rebalance", {}))
        reb_enabled = bool(reb.pop("enabled", True))
        reb.pop("schema", None)
        tracker = dict(d.get("tracker", {}))
        for key in ("hue_window", "sat_range", "val_range"):
            if key in tracker:
                tracker[key] = tuple(tracker[key])
        refinement = d.get("refinement", {})
        synth = dict(d.get("synth", {}))
        if "resolution" in synth:
            synth["resolution"] = tuple(synth["resolution"])
        seed = int(d.get("seed", 0))
        return cls(
            backend=BackendConfig(
                kind=backend.get("kind", "oracle"),
                url=backend.get("url"),
                mu=float(backend.get("mu", 0.0)),
                sigma=float(backend.get("sigma", 1.0)),
                contamination=float(backend.get("contamination", 0.0)),
                drift=None if drift is None else tuple(drift),
            ),
            sampler=SamplerConfig(
                gamma=float(sampler.get("gamma", 0.5)),
                num_steps=int(sampler.get("num_steps", 50)),
                sigma_mode=sampler.get("sigma_mode", "beta"),
                rng_seed=seed,
            ),
            guidance=GuidanceConfig(weight=float(guidance.get("lambda", 8.0))),
            marker=MarkerSpec(hue=float(marker.get("hue", 0.0)),
                              radius=float(marker.get("radius", 2.0))),
            rebalance=RebalanceParams(
                center_hue=float(reb.get("center_hue", 0.0)),
                window=tuple(reb.get("window", (-30.0, 10.0))),
                sat_axis=float(reb.get("sat_axis", 80.0)),
                val_axis=float(reb.get("val_axis", 30.0)),
                sat_cap=float(reb.get("sat_cap", 80.0)),
            ),
            rebalance_enabled=reb_enabled,
            tracker=TrackerParams(**tracker),
            refinement=RefinementParams(
                radius=float(refinement.get("radius", 40.0)),
                rounds=int(refinement.get("rounds", 1)),
            ),
            synth=SynthConfig(**synth),
            preprocess_command=d.get("preprocess", {}).get("command"),
            seed=seed,
            workers=int(d.get("workers", 1)),
        )

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "seed": self.seed,
            "workers": self.workers,
            "backend": {
                "kind": self.backend.kind,
                "url": self.backend.url,
                "mu": self.backend.mu,
                "sigma": self.backend.sigma,
                "contamination": self.backend.contamination,
                "drift": None if self.backend.drift is None
                         else list(self.backend.drift),
            },
            "sampler": {
                "gamma": self.sampler.gamma,
                "num_steps": self.sampler.num_steps,
                "sigma_mode": self.sampler.sigma_mode,
            },
            "guidance": {"lambda": self.guidance.weight},
            "marker": {"hue": self.marker.hue, "radius": self.marker.radius},
            "rebalance": {
                "enabled": self.rebalance_enabled,
                "center_hue": self.rebalance.center_hue,
                "window": list(self.rebalance.window),
                "sat_axis": self.rebalance.sat_axis,
                "val_axis": self.rebalance.val_axis,
                "sat_cap": self.rebalance.sat_cap,
            },
            "tracker": {
                "marker_hue": self.tracker.marker_hue,
                "hue_window": list(self.tracker.hue_window),
                "sat_range": list(self.tracker.sat_range),
                "val_range": list(self.tracker.val_range),
                "search_radius": self.tracker.search_radius,
                "max_search_radius": self.tracker.max_search_radius,
                "expansion": self.tracker.expansion,
                "averaging_radius": self.tracker.averaging_radius,
                "color_space": self.tracker.color_space,
            },
            "refinement": {"radius": self.refinement.radius,
                           "rounds": self.refinement.rounds},
            "preprocess": {"command": self.preprocess_command},
            "synth": {
                "n": self.synth.n,
                "preset": self.synth.preset,
                "resolution": list(self.synth.resolution),
                "num_frames": self.synth.num_frames,
                "seed": self.synth.seed,
            },
        }


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise InvalidArgumentError(f"config file {path} does not exist")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    return PipelineConfig.from_dict(data)


def desk_config(resolution=(64, 64), **overrides) -> PipelineConfig:
    """Defaults tuned for desk-scale verification runs.

    Tracker radii follow TrackerParams.scaled_for; the refinement tube radius
    scales by the same factor, floored at 8 px so a few pixels of generation
    drift plus the marker disk stay inside the tube.
    """
    h, w = resolution
    scale = min(h, w) / 480.0
    cfg = PipelineConfig(
        tracker=TrackerParams.scaled_for(resolution),
        refinement=RefinementParams(radius=max(8.0, 40.0 * scale), rounds=1),
        synth=SynthConfig(resolution=tuple(resolution)),
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg
