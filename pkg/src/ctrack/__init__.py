"""Zero-shot point tracking by point-prompting a video diffusion sampler.

The sampler is generic over a noise-prediction backend: analytic oracles make
the whole pipeline verifiable at desk scale, and a remote client speaks the
wire protocol served by real pretrained models.
"""

from .backends import (AnalyticGaussianDenoiser, Denoiser,
                       TrajectoryOracleDenoiser)
from .config import PipelineConfig, desk_config, load_config
from .diffusion import (Conditioning, GuidanceConfig, SamplerConfig,
                        forward_direct, forward_step, guided_epsilon,
                        inpaint_regenerate, reverse_step, sdedit_regenerate)
from .errors import (BackendError, ConfigError, CtrackError,
                     InvalidArgumentError, NumericError)
from .metrics import (MetricsReport, average_jaccard, evaluate_track,
                      occlusion_accuracy, positional_accuracy, rescale_track)
from .pipeline import QueryResult, run_queries, run_query
from .refinement import (RefinementParams, build_mask, downsample_mask,
                         refine_track)
from .schedule import NoiseSchedule
from .synthetic import (SceneConfig, SyntheticCase, build_oracle_targets,
                        generate_scene, make_suite)
from .tracker import (Track, TrackerParams, TrackState, detect_red_pixels,
                      track_frame, track_video)
from .videoprep import (MarkerSpec, RebalanceParams, insert_marker, pad_video,
                        rebalance_colors, truncate_video, unit_to_video,
                        video_to_unit)

__version__ = "0.1.0"
