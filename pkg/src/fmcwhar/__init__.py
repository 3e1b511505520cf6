"""FMCW-radar activity-recognition preprocessing, simulation and evaluation."""

from .config import ArrayGeometry, DerivedParams, RadarConfig, derive_params, load_config
from .dsp import (
    MtiState,
    RangeDopplerMap,
    RangeMatrix,
    RawFrame,
    blackman_harris_window,
    doppler_fft,
    mti_update,
    range_fft,
    remove_dc,
)
from .sim import PointTarget, SceneScript, synthesize_frame, synthesize_recording

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "DerivedParams",
    "MtiState",
    "PointTarget",
    "RadarConfig",
    "RangeDopplerMap",
    "RangeMatrix",
    "RawFrame",
    "SceneScript",
    "blackman_harris_window",
    "derive_params",
    "doppler_fft",
    "load_config",
    "mti_update",
    "range_fft",
    "remove_dc",
    "synthesize_frame",
    "synthesize_recording",
]
