"""Adaptive and robust null-space-projection directional modulation."""

from .array_model import ArrayGeometry, Convention, downlink_manifold, qpsk_demodulate, qpsk_modulate, uplink_steering
from .beamformer import (
    BeamformerSet,
    QuadratureError,
    Scheme,
    SynthesisError,
    conditional_R,
    conditional_u,
    fixed_robust,
    g_integral,
    nonrobust_nsp,
    robust_beamformers,
)
from .config import ConfigError, ExperimentConfig, parse_config
from .downlink import LinkConfig, achievable_rate, receive, secrecy_rate, transmit
from .estimator import (
    EstimationError,
    associate_sources,
    eigendecompose,
    estimate_snr,
    noise_variance,
    root_music,
    sample_covariance,
)
from .experiments import run_experiment
from .predictor import EndfireError, crlb, error_interval
from .uplink import SnapshotSet, UplinkScenario, generate_snapshots

__version__ = "0.1.0"
