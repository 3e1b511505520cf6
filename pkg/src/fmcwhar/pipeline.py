"""Raw frames -> data cubes, wiring dsp, beamform and cube together."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beamform import AngleGrid, range_angle_map
from .config import ArrayGeometry, RadarConfig
from .cube import build_cube
from .dsp import MtiState, RawFrame, blackman_harris_window, doppler_fft, mti_update, range_fft, remove_dc, slow_time_peak
from .errors import ConfigError, ShapeError

DB_FLOOR = 1e-12  # absolute power floor before taking logs


@dataclass(frozen=True)
class ProcessingOptions:
    mti_alpha: float = 0.1
    loading: float = 1e-3
    grid: AngleGrid = field(default_factory=AngleGrid)
    scale: str = "db"  # "db" or "linear"
    # dB maps are clipped this far below their own peak; None keeps the full range
    dynamic_range_db: float | None = 40.0

    def __post_init__(self):
        if self.scale not in ("db", "linear"):
            raise ConfigError(f"unknown map scale {self.scale!r}")
        if self.dynamic_range_db is not None and not self.dynamic_range_db > 0:
            raise ConfigError("dynamic_range_db must be positive")


def to_db(power, dynamic_range_db=None):
    """``10 log10(power)``, optionally floored at ``dynamic_range_db`` below the map peak."""
    out = 10.0 * np.log10(np.maximum(power, DB_FLOOR))
    if dynamic_range_db is not None:
        out = np.maximum(out, out.max() - dynamic_range_db)
    return out


class FrameProcessor:
    """Stateful per-recording processor.

    Spectral stages are pure per frame; only the MTI clutter estimate carries over,
    so frames must be fed in recording order.
    """

    def __init__(self, cfg: RadarConfig, geom: ArrayGeometry, options: ProcessingOptions | None = None):
        geom.check(cfg)
        self.cfg = cfg
        self.geom = geom
        self.options = options or ProcessingOptions()
        self.window = blackman_harris_window(cfg.samples_per_chirp)
        self.mti = MtiState(alpha=self.options.mti_alpha)

    def maps(self, frame: RawFrame):
        """RD (channel-averaged magnitude), RA and RE power for one frame, plus the MTI profile."""
        if frame.samples.shape != self.cfg.shape:
            raise ShapeError(f"frame shape {frame.samples.shape} does not match config {self.cfg.shape}")
        rm = range_fft(remove_dc(frame), self.window)
        self.mti, filtered = mti_update(self.mti, slow_time_peak(rm))
        rd = doppler_fft(rm).combined()
        opts = self.options
        ra = range_angle_map(rm, self.geom, "azimuth", opts.grid, opts.loading).power
        re = range_angle_map(rm, self.geom, "elevation", opts.grid, opts.loading).power
        if opts.scale == "db":
            dr = opts.dynamic_range_db
            rd, ra, re = to_db(rd**2, dr), to_db(ra, dr), to_db(re, dr)
        return rd, ra, re, filtered

    def process(self, frame: RawFrame, label=None):
        rd, ra, re, filtered = self.maps(frame)
        cube = build_cube(rd, ra, re, frame.frame_index, label, n_angles=len(self.options.grid))
        return cube, filtered


def process_recording(cfg, geom, frames, labels=None, options=None):
    """Returns ``(cubes, mti_profiles)``; ``mti_profiles`` is (frames, C, n_range_bins)."""
    proc = FrameProcessor(cfg, geom, options)
    labels = labels if labels is not None else [None] * len(frames)
    if len(labels) != len(frames):
        raise ShapeError("one label per frame is required")
    cubes, profiles = [], []
    for frame, label in zip(frames, labels):
        cube, filtered = proc.process(frame, label)
        cubes.append(cube)
        profiles.append(filtered)
    return cubes, np.array(profiles)
