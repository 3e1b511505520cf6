"""Analytic point-target echo simulator producing real-valued IF samples.

Radial velocity is the range rate: positive values move the target away from
the radar, negative values toward it.  Each target contributes

    A * cos(2 pi f_b t_m + 2 pi (2 v T_c / lambda) n + phi_spatial(c) + 4 pi R / lambda)

with ``f_b = 2 B R / (c T_c)``.  ``R`` is the range at the start of the frame, so
the carrier phase stays continuous from one frame to the next.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import SPEED_OF_LIGHT, ArrayGeometry, RadarConfig, derive_params
from .dsp import RawFrame
from .errors import SimulationError
from .labels import check_label


@dataclass(frozen=True)
class PointTarget:
    range_m: float
    radial_velocity_mps: float = 0.0
    azimuth_deg: float = 0.0
    elevation_deg: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.range_m < 0:
            raise SimulationError(f"target range must be >= 0, got {self.range_m}")
        for name in ("azimuth_deg", "elevation_deg"):
            if abs(getattr(self, name)) > 90:
                raise SimulationError(f"{name} must lie in [-90, 90], got {getattr(self, name)}")
        if not self.amplitude > 0:
            raise SimulationError(f"amplitude must be positive, got {self.amplitude}")


@dataclass(frozen=True)
class Interval:
    """Frames ``start <= f < stop`` share one label and target set.

    Target ranges are given at ``start``; they then move with their radial
    velocity.  ``velocity_jitter_mps`` adds a fresh Gaussian velocity offset per
    frame to the Doppler term only (micro-motion of a seated or lying person).
    """

    start: int
    stop: int
    label: str
    targets: tuple[PointTarget, ...] = ()
    velocity_jitter_mps: float = 0.0

    def __post_init__(self):
        if not 0 <= self.start < self.stop:
            raise SimulationError(f"bad frame interval [{self.start}, {self.stop})")
        try:
            check_label(self.label)
        except ValueError as exc:
            raise SimulationError(str(exc)) from None
        if self.velocity_jitter_mps < 0:
            raise SimulationError("velocity_jitter_mps must be >= 0")
        object.__setattr__(self, "targets", tuple(self.targets))


@dataclass(frozen=True)
class SceneScript:
    intervals: tuple[Interval, ...]
    noise_std: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        ivs = tuple(sorted(self.intervals, key=lambda iv: iv.start))
        object.__setattr__(self, "intervals", ivs)
        if not ivs:
            raise SimulationError("scene script has no intervals")
        if self.noise_std < 0:
            raise SimulationError(f"noise_std must be >= 0, got {self.noise_std}")
        expected = 0
        for iv in ivs:
            if iv.start < expected:
                raise SimulationError(f"interval [{iv.start}, {iv.stop}) overlaps the previous one")
            if iv.start > expected:
                raise SimulationError(f"frames {expected}..{iv.start - 1} are not covered by any interval")
            expected = iv.stop

    @property
    def n_frames(self):
        return self.intervals[-1].stop

    @classmethod
    def from_dict(cls, data):
        intervals = []
        for iv in data["intervals"]:
            targets = tuple(PointTarget(**t) for t in iv.get("targets", ()))
            intervals.append(
                Interval(
                    start=int(iv["start"]),
                    stop=int(iv["stop"]),
                    label=iv["label"],
                    targets=targets,
                    velocity_jitter_mps=float(iv.get("velocity_jitter_mps", 0.0)),
                )
            )
        return cls(tuple(intervals), float(data.get("noise_std", 0.0)), int(data.get("rng_seed", 0)))

    def to_dict(self):
        return {
            "noise_std": self.noise_std,
            "rng_seed": self.rng_seed,
            "intervals": [
                {
                    "start": iv.start,
                    "stop": iv.stop,
                    "label": iv.label,
                    "velocity_jitter_mps": iv.velocity_jitter_mps,
                    "targets": [t.__dict__.copy() for t in iv.targets],
                }
                for iv in self.intervals
            ],
        }


def load_scene_script(path) -> SceneScript:
    return SceneScript.from_dict(json.loads(Path(path).read_text()))


def noise_std_for_snr(amplitude, snr_db):
    """Per-sample noise std giving ``snr_db`` against a real tone of ``amplitude``."""
    return amplitude / math.sqrt(2.0) * 10.0 ** (-snr_db / 20.0)


def _frame_rng(seed, frame_index, stream=0):
    # independent stream per (seed, frame) so frames can be generated in any order
    return np.random.default_rng([int(seed), int(frame_index), stream])


def _render(cfg, geom, targets, frame_index, noise_std, rng_seed, doppler_velocities=None):
    """Samples for targets whose ``range_m`` is already the range at this frame."""
    dp = derive_params(cfg)
    C, N, M = cfg.shape
    tc = cfg.chirp_duration_s
    lam = dp.wavelength_m
    t_m = np.arange(M) / cfg.adc_rate_sps
    n = np.arange(N)
    out = np.zeros((C, N, M))
    d = geom.element_spacing_wavelengths
    az_ref, az_el = geom.azimuth_pair
    el_ref, el_el = geom.elevation_pair
    for i, tgt in enumerate(targets):
        if not tgt.range_m < dp.max_range_m:
            raise SimulationError(
                f"target at {tgt.range_m:.3f} m lies beyond max range {dp.max_range_m:.3f} m (frame {frame_index})"
            )
        v = tgt.radial_velocity_mps if doppler_velocities is None else doppler_velocities[i]
        f_beat = 2.0 * dp.bandwidth_hz * tgt.range_m / (SPEED_OF_LIGHT * tc)
        phase0 = 4.0 * np.pi * tgt.range_m / lam
        spatial = np.zeros(C)
        spatial[az_el] += 2.0 * np.pi * d * np.sin(np.radians(tgt.azimuth_deg))
        spatial[el_el] += 2.0 * np.pi * d * np.sin(np.radians(tgt.elevation_deg))
        doppler = 2.0 * np.pi * (2.0 * v * tc / lam) * n
        phase = (
            2.0 * np.pi * f_beat * t_m[None, None, :]
            + doppler[None, :, None]
            + spatial[:, None, None]
            + phase0
        )
        out += tgt.amplitude * np.cos(phase)
    if noise_std > 0:
        out += noise_std * _frame_rng(rng_seed, frame_index).standard_normal(out.shape)
    return RawFrame(out, frame_index, frame_index / cfg.frame_rate_hz)


def synthesize_frame(
    cfg: RadarConfig,
    geom: ArrayGeometry,
    targets,
    frame_index: int = 0,
    noise_std: float = 0.0,
    rng_seed: int = 0,
) -> RawFrame:
    """One raw frame; target ranges are taken at frame 0 and advanced to ``frame_index``."""
    if noise_std < 0:
        raise SimulationError(f"noise_std must be >= 0, got {noise_std}")
    geom.check(cfg)
    dt = frame_index / cfg.frame_rate_hz
    moved = [replace(t, range_m=t.range_m + t.radial_velocity_mps * dt) for t in targets]
    for t in moved:
        if t.range_m < 0:
            raise SimulationError(f"target passed through the radar before frame {frame_index}")
    return _render(cfg, geom, moved, frame_index, noise_std, rng_seed)


@dataclass
class Recording:
    frames: list[RawFrame]
    labels: list[str]
    # per frame, per target: range at frame start (for tests and rendering)
    ranges: list[list[float]] = field(default_factory=list)


def synthesize_recording(cfg: RadarConfig, geom: ArrayGeometry, script: SceneScript) -> Recording:
    geom.check(cfg)
    period = 1.0 / cfg.frame_rate_hz
    rec = Recording([], [])
    for iv in script.intervals:
        for f in range(iv.start, iv.stop):
            dt = (f - iv.start) * period
            current = [replace(t, range_m=t.range_m + t.radial_velocity_mps * dt) for t in iv.targets]
            if any(t.range_m < 0 for t in current):
                raise SimulationError(f"target passed through the radar at frame {f}")
            vel = None
            if iv.velocity_jitter_mps > 0 and current:
                jitter = _frame_rng(script.rng_seed, f, 1).normal(0.0, iv.velocity_jitter_mps, len(current))
                vel = [t.radial_velocity_mps + j for t, j in zip(current, jitter)]
            rec.frames.append(_render(cfg, geom, current, f, script.noise_std, script.rng_seed, vel))
            rec.labels.append(iv.label)
            rec.ranges.append([t.range_m for t in current])
    return rec
