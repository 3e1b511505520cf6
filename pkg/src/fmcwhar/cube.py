"""Per-frame data cubes, 5-cube segmentation and per-channel standardization."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NotFittedError, SegmentationError, ShapeError
from .labels import CODES

SEGMENT_LENGTH = 5
STD_FLOOR = 1e-8
CHANNELS = ("rd", "ra", "re")


@dataclass(frozen=True)
class FeatureCube:
    rd: np.ndarray  # (N, n_range_bins)
    ra: np.ndarray  # (n_range_bins, n_angles)
    re: np.ndarray  # (n_range_bins, n_angles)
    frame_index: int
    label: str | None = None

    def channel(self, name):
        return getattr(self, name)


def build_cube(rd, ra, re, frame_index, label=None, n_angles=None) -> FeatureCube:
    rd, ra, re = (np.asarray(m, dtype=np.float64) for m in (rd, ra, re))
    if rd.ndim != 2 or ra.ndim != 2 or re.ndim != 2:
        raise ShapeError("RD, RA and RE maps must all be 2-D")
    if ra.shape != re.shape:
        raise ShapeError(f"RA shape {ra.shape} differs from RE shape {re.shape}")
    if ra.shape[0] != rd.shape[1]:
        raise ShapeError(f"RA has {ra.shape[0]} range bins, RD has {rd.shape[1]}")
    if n_angles is not None and ra.shape[1] != n_angles:
        raise ShapeError(f"angle maps have {ra.shape[1]} columns, grid has {n_angles}")
    for name, m in zip(CHANNELS, (rd, ra, re)):
        if not np.all(np.isfinite(m)):
            raise ShapeError(f"{name} map contains non-finite values")
    if label is not None and label not in CODES:
        raise ShapeError(f"unknown activity label {label!r}")
    return FeatureCube(rd, ra, re, int(frame_index), label)


@dataclass(frozen=True)
class Segment:
    cubes: tuple[FeatureCube, ...]
    label: str
    recording: str = ""
    start_frame: int = 0

    def __post_init__(self):
        if len(self.cubes) != SEGMENT_LENGTH:
            raise SegmentationError(f"a segment holds exactly {SEGMENT_LENGTH} cubes, got {len(self.cubes)}")
        if any(c.label != self.label for c in self.cubes):
            raise SegmentationError("segment cubes carry mixed labels")
        idx = [c.frame_index for c in self.cubes]
        if idx != list(range(idx[0], idx[0] + SEGMENT_LENGTH)):
            raise SegmentationError(f"segment frame indices are not consecutive: {idx}")

    def stack(self, name):
        """``(5, ...)`` array of one channel across the member cubes."""
        return np.stack([c.channel(name) for c in self.cubes])

    def flatten(self, channels=CHANNELS):
        return np.concatenate([self.stack(name).ravel() for name in channels])


def _window_ok(window):
    first = window[0]
    consecutive = all(b.frame_index == a.frame_index + 1 for a, b in zip(window, window[1:]))
    return consecutive and all(c.label == first.label for c in window)


def segment_stream(cubes, recording="") -> list[Segment]:
    """Cut a labelled cube sequence into non-overlapping windows of five.

    Uniform windows become segments.  A window with mixed labels is dropped
    whole and scanning carries on with the next five cubes; a trailing partial
    window is dropped.
    """
    cubes = list(cubes)
    for c in cubes:
        if c.label is None:
            raise SegmentationError(f"cube at frame {c.frame_index} is unlabeled")
    out = []
    for start in range(0, len(cubes) - SEGMENT_LENGTH + 1, SEGMENT_LENGTH):
        window = cubes[start : start + SEGMENT_LENGTH]
        if _window_ok(window):
            out.append(Segment(tuple(window), window[0].label, recording, window[0].frame_index))
    return out


@dataclass(frozen=True)
class Normalizer:
    mean: dict
    std: dict

    def to_arrays(self):
        return {f"norm_{k}_{n}": np.float64(getattr(self, k)[n]) for k in ("mean", "std") for n in CHANNELS}

    @classmethod
    def from_arrays(cls, arrays):
        return cls(
            {n: float(arrays[f"norm_mean_{n}"]) for n in CHANNELS},
            {n: float(arrays[f"norm_std_{n}"]) for n in CHANNELS},
        )


def fit_normalizer(train_val_segments) -> Normalizer:
    """Scalar mean/std per channel over every element of the train+val cubes.

    Accumulates sums in float64 in segment order so the result does not depend
    on how callers batch the data.
    """
    segs = list(train_val_segments)
    if not segs:
        raise ValueError("cannot fit a normalizer on an empty set")
    mean, std = {}, {}
    for name in CHANNELS:
        n = 0
        s = 0.0
        for seg in segs:
            x = seg.stack(name)
            n += x.size
            s += float(x.sum())
        mu = s / n
        ss = 0.0
        for seg in segs:
            ss += float(((seg.stack(name) - mu) ** 2).sum())
        mean[name] = mu
        std[name] = max(np.sqrt(ss / n), STD_FLOOR)
    return Normalizer(mean, std)


def apply_normalizer(norm: Normalizer | None, segment: Segment) -> Segment:
    if norm is None:
        raise NotFittedError("normalizer has not been fitted")
    cubes = tuple(
        replace(c, **{n: (c.channel(n) - norm.mean[n]) / norm.std[n] for n in CHANNELS}) for c in segment.cubes
    )
    return replace(segment, cubes=cubes)
