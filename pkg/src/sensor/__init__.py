"""
Radar track-before-detect sensor model: NCV dynamics, cell grid, point
spread function, Swerling-0 frame synthesis and power likelihoods.
"""

from src.sensor.dynamics import (
    DynamicsParams,
    NcvTransition,
    drift,
    process_noise,
    propagate,
    propagate_points,
    transition_log_density,
    transition_matrix,
)
from src.sensor.frame_io import dump_frame_binary, dump_frame_csv, load_frame_binary
from src.sensor.radar import (
    DEFAULT_PSF_THRESHOLD,
    EchoModel,
    RadarFrame,
    RadarGrid,
    RadarLikelihood,
    SensorGeometryError,
    Template,
    amplitude_from_snr,
    cell_log_likelihood_ratio,
    frame_log_likelihood,
    joint_log_likelihood_batch,
    log_i0,
    noiseless_frame,
    measurement_coordinates,
    psf,
    separable_frame_log_likelihood,
    separable_log_likelihood_batch,
    snr_from_amplitude,
    synthesize_frame,
    template,
    template_windows,
)

__all__ = [
    "DynamicsParams",
    "NcvTransition",
    "drift",
    "process_noise",
    "propagate",
    "propagate_points",
    "transition_log_density",
    "transition_matrix",
    "dump_frame_binary",
    "dump_frame_csv",
    "load_frame_binary",
    "DEFAULT_PSF_THRESHOLD",
    "EchoModel",
    "RadarFrame",
    "RadarGrid",
    "RadarLikelihood",
    "SensorGeometryError",
    "Template",
    "amplitude_from_snr",
    "cell_log_likelihood_ratio",
    "frame_log_likelihood",
    "joint_log_likelihood_batch",
    "log_i0",
    "noiseless_frame",
    "measurement_coordinates",
    "psf",
    "separable_frame_log_likelihood",
    "separable_log_likelihood_batch",
    "snr_from_amplitude",
    "synthesize_frame",
    "template",
    "template_windows",
]
