"""Continuous-aperture MIMO over doubly-dispersive channels.

Modules: ``quadrature`` (Gauss-Legendre surface integration), ``channel``
(scenes and kernels), ``waveforms`` (OFDM/OTFS/AFDM effective channels),
``beamforming`` (alternating matched-filter optimizer), ``baselines``
(discrete-array comparators) and ``experiments`` (sweeps, CSV, validation).
"""

from .baselines import ElementChannel, UpaConfig, discrete_optimize, steering_vector, svd_baseline_power
from .beamforming import BeamformerField, OptimizationTrace, OptimizerConfig, coupling_matrix, optimize
from .channel import Aperture, Path, Scene, SceneSamplingParams, sample_scene, spatial_kernel
from .exceptions import (
    ConfigError,
    DegenerateObjectiveError,
    InvalidArgumentError,
    ShapeMismatchError,
    SingularityError,
)
from .experiments import ExperimentConfig, load_config, run_sweep, validate
from .quadrature import legendre_rule, make_grid
from .waveforms import EffectiveChannel, WaveformKind, afdm, ofdm, otfs

__version__ = "0.1.0"

__all__ = [
    "Aperture", "BeamformerField", "ConfigError", "DegenerateObjectiveError", "EffectiveChannel",
    "ElementChannel", "ExperimentConfig", "InvalidArgumentError", "OptimizationTrace", "OptimizerConfig",
    "Path", "Scene", "SceneSamplingParams", "ShapeMismatchError", "SingularityError", "UpaConfig",
    "WaveformKind", "afdm", "coupling_matrix", "discrete_optimize", "legendre_rule", "load_config",
    "make_grid", "ofdm", "optimize", "otfs", "run_sweep", "sample_scene", "spatial_kernel",
    "steering_vector", "svd_baseline_power", "validate",
]
