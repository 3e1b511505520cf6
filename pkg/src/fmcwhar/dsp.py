"""Fast-time / slow-time spectral chain.

raw C x N x M frame -> DC removal -> Blackman-Harris window -> range FFT
-> (MTI filtered range profile) and (slow-time mean removal -> Doppler FFT).

All transforms are unnormalized; downstream consumers only look at peak
locations and relative levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError

# 4-term Blackman-Harris (minimum 4-term, -92 dB sidelobes)
BH_COEFFS = (0.35875, 0.48829, 0.14128, 0.01168)


@dataclass
class RawFrame:
    samples: np.ndarray  # (C, N, M) real ADC samples
    frame_index: int = 0
    timestamp_s: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 3:
            raise ShapeError(f"raw frame must be C x N x M, got shape {self.samples.shape}")

    @property
    def shape(self):
        return self.samples.shape


@dataclass
class RangeMatrix:
    bins: np.ndarray  # (C, N, M // 2) complex
    frame_index: int = 0

    @property
    def n_range_bins(self):
        return self.bins.shape[-1]

    @property
    def n_chirps(self):
        return self.bins.shape[-2]


@dataclass
class MtiState:
    """Per-range-bin clutter estimate ``t`` of the recursive MTI filter.

    ``t_lo`` holds the rounding residue of ``t`` (the estimate is ``t + t_lo``);
    without it the filtered output, a small difference of two large numbers,
    loses several digits once the filter has converged.
    """

    alpha: float = 0.1
    t: np.ndarray | None = None
    initialized: bool = False
    t_lo: np.ndarray | None = None

    def __post_init__(self):
        _check_alpha(self.alpha)


@dataclass
class RangeDopplerMap:
    # (C, N, n_range_bins) complex; Doppler axis fftshifted, zero Doppler at N // 2
    spectra: np.ndarray
    frame_index: int = 0
    magnitude: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.magnitude = np.abs(self.spectra)

    @property
    def center_bin(self):
        return self.spectra.shape[-2] // 2

    def combined(self):
        """Channel-averaged magnitude, Doppler bins x range bins."""
        return self.magnitude.mean(axis=0)


def _check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"MTI alpha must lie in (0, 1], got {alpha}")


def remove_dc(frame: RawFrame) -> RawFrame:
    x = frame.samples.astype(np.float64, copy=False)
    return RawFrame(x - x.mean(axis=-1, keepdims=True), frame.frame_index, frame.timestamp_s)


def blackman_harris_window(length: int) -> np.ndarray:
    """Symmetric 4-term Blackman-Harris window of ``length`` points."""
    if length < 2:
        raise ValueError(f"window length must be >= 2, got {length}")
    a0, a1, a2, a3 = BH_COEFFS
    x = 2.0 * np.pi * np.arange(length) / (length - 1)
    return a0 - a1 * np.cos(x) + a2 * np.cos(2 * x) - a3 * np.cos(3 * x)


def fast_time_spectrum(samples: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Full M-bin windowed FFT along the last (fast-time) axis."""
    samples = np.asarray(samples)
    window = np.asarray(window)
    if window.ndim != 1 or window.shape[0] != samples.shape[-1]:
        raise ShapeError(f"window length {window.shape} does not match {samples.shape[-1]} samples per chirp")
    return np.fft.fft(samples * window, axis=-1)


def range_fft(frame: RawFrame, window: np.ndarray) -> RangeMatrix:
    spec = fast_time_spectrum(frame.samples, window)
    m = spec.shape[-1]
    return RangeMatrix(spec[..., : m // 2], frame.frame_index)


def slow_time_peak(rm: RangeMatrix) -> np.ndarray:
    """``r_max``: per channel and range bin, the largest magnitude over the chirps."""
    return np.abs(rm.bins).max(axis=-2)


def _two_sum(a, b):
    """``a + b`` as a rounded sum plus its exact rounding error."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def mti_update(state: MtiState, range_profile_peak) -> tuple[MtiState, np.ndarray]:
    """One step of the recursive clutter filter.

    ``filtered = |r_max - t_prev|`` uses the previous estimate; the estimate is then
    updated to ``alpha * r_max + (1 - alpha) * t_prev``, evaluated as
    ``r_max - (1 - alpha) * (r_max - t_prev)`` in compensated arithmetic.
    """
    _check_alpha(state.alpha)
    r = np.asarray(range_profile_peak, dtype=np.float64)
    hi = np.zeros_like(r) if state.t is None else state.t
    lo = np.zeros_like(r) if state.t_lo is None else state.t_lo
    if hi.shape != r.shape:
        raise ShapeError(f"MTI state shape {hi.shape} does not match input {r.shape}")
    s, e = _two_sum(r, -hi)
    diff = s + (e - lo)
    hi, lo = _two_sum(r, -(1.0 - state.alpha) * diff)
    return MtiState(alpha=state.alpha, t=hi, initialized=True, t_lo=lo), np.abs(diff)


def doppler_fft(rm: RangeMatrix) -> RangeDopplerMap:
    x = rm.bins - rm.bins.mean(axis=-2, keepdims=True)  # zero-Doppler notch
    spec = np.fft.fftshift(np.fft.fft(x, axis=-2), axes=-2)
    return RangeDopplerMap(spec, rm.frame_index)
