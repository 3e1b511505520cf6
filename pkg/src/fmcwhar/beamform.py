"""Capon (MVDR) angle spectra over two-element receiver pairs.

Snapshots are the N chirps of one frame at a fixed range bin.  With only two
elements the sample covariance of a single dominant source is close to rank one,
so diagonal loading is always applied before inversion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ArrayGeometry
from .dsp import RangeMatrix
from .errors import ConfigError, ShapeError, SingularCovarianceError

DEGENERATE_FLOOR = 1e-12


@dataclass(frozen=True)
class AngleGrid:
    start_deg: float = -60.0
    end_deg: float = 60.0
    step_deg: float = 1.0

    def __post_init__(self):
        if not self.start_deg < self.end_deg:
            raise ConfigError("angle grid start must be below end")
        if not self.step_deg > 0:
            raise ConfigError("angle grid step must be positive")
        if self.start_deg < -90 or self.end_deg > 90:
            raise ConfigError("angle grid must stay within [-90, 90] degrees")

    @property
    def angles(self) -> np.ndarray:
        n = int(np.floor((self.end_deg - self.start_deg) / self.step_deg + 1e-9)) + 1
        return self.start_deg + self.step_deg * np.arange(n)

    def __len__(self):
        return len(self.angles)


@dataclass
class SpatialCovariance:
    R: np.ndarray  # (2, 2) or (..., 2, 2) complex Hermitian
    snapshot_count: int
    loading: float
    degenerate: bool = False


@dataclass
class RangeAngleMap:
    power: np.ndarray  # (n_range_bins, n_angles)
    kind: str
    angles_deg: np.ndarray

    def peak(self):
        """``(range_bin, angle_deg)`` of the global maximum."""
        b, a = np.unravel_index(np.argmax(self.power), self.power.shape)
        return int(b), float(self.angles_deg[a])


def steering_vector(angle_deg, spacing_wavelengths=0.5):
    """``[1, exp(j 2 pi d sin(theta))]``; vectorized over ``angle_deg``."""
    angle = np.asarray(angle_deg, dtype=np.float64)
    if np.any(np.abs(angle) > 90):
        raise ConfigError("steering angle must lie in [-90, 90] degrees")
    second = np.exp(1j * 2.0 * np.pi * spacing_wavelengths * np.sin(np.radians(angle)))
    return np.stack([np.ones_like(second), second], axis=-1)


def _pair_snapshots(rm, pair):
    C = rm.bins.shape[0]
    if len(pair) != 2 or max(pair) >= C or min(pair) < 0 or pair[0] == pair[1]:
        raise ConfigError(f"invalid channel pair {pair} for {C} channels")
    # (2, N, bins)
    return rm.bins[list(pair)]


def _covariance(x, loading_factor):
    """Loaded sample covariance per range bin for snapshots ``x`` shaped (2, N, bins)."""
    n = x.shape[1]
    if n == 0:
        raise ShapeError("spatial covariance needs at least one snapshot")
    R = np.einsum("inb,jnb->bij", x, x.conj()) / n
    tr = np.real(np.trace(R, axis1=-2, axis2=-1))
    eye = np.eye(2)
    degenerate = tr <= 0
    R = R + (loading_factor * tr / 2.0)[:, None, None] * eye
    R[degenerate] = DEGENERATE_FLOOR * eye
    return R, degenerate


def spatial_covariance(rm: RangeMatrix, pair, range_bin: int, loading_factor: float = 1e-3) -> SpatialCovariance:
    if not 0 <= range_bin < rm.n_range_bins:
        raise ShapeError(f"range bin {range_bin} outside 0..{rm.n_range_bins - 1}")
    if loading_factor < 0:
        raise ConfigError("loading factor must be >= 0")
    x = _pair_snapshots(rm, pair)[:, :, range_bin : range_bin + 1]
    R, degenerate = _covariance(x, loading_factor)
    return SpatialCovariance(R[0], x.shape[1], loading_factor, bool(degenerate[0]))


def inverse_2x2(R):
    """Closed-form inverse of (a stack of) 2x2 matrices."""
    R = np.asarray(R)
    a, b = R[..., 0, 0], R[..., 0, 1]
    c, d = R[..., 1, 0], R[..., 1, 1]
    det = a * d - b * c
    inv = np.empty_like(R, dtype=np.result_type(R, 1.0))
    inv[..., 0, 0] = d
    inv[..., 0, 1] = -b
    inv[..., 1, 0] = -c
    inv[..., 1, 1] = a
    return inv / det[..., None, None], det


def _spectrum(R, angles, spacing):
    """Capon power for covariances ``R`` (..., 2, 2) on ``angles``; returns (..., n_angles)."""
    # P(theta) scales with R, so invert R / max|R| to keep det clear of under/overflow;
    # singular inputs are reported by the caller, so silence the inf/nan they produce here
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        scale = np.abs(R).max(axis=(-2, -1))
        scale = np.where(scale > 0, scale, 1.0)
        S = R / scale[..., None, None]
        Sinv, det = inverse_2x2(S)
        tr = np.real(np.trace(S, axis1=-2, axis2=-1))
        singular = ~(np.abs(det) > 1e-14 * tr**2)  # NaN counts as singular
        a = steering_vector(angles, spacing)  # (A, 2)
        quad = np.einsum("ai,...ij,aj->...a", a.conj(), Sinv, a)
        return scale[..., None] / np.real(quad), singular


def capon_spectrum(R: SpatialCovariance, grid: AngleGrid, spacing_wavelengths: float = 0.5) -> np.ndarray:
    power, singular = _spectrum(R.R, grid.angles, spacing_wavelengths)
    if np.any(singular):
        raise SingularCovarianceError("covariance is singular after loading; raise the loading factor")
    return power


def range_angle_map(
    rm: RangeMatrix,
    geom: ArrayGeometry,
    kind: str,
    grid: AngleGrid | None = None,
    loading: float = 1e-3,
) -> RangeAngleMap:
    grid = grid or AngleGrid()
    if loading < 0:
        raise ConfigError("loading factor must be >= 0")
    x = _pair_snapshots(rm, geom.pair(kind))
    R, _ = _covariance(x, loading)
    power, singular = _spectrum(R, grid.angles, geom.element_spacing_wavelengths)
    if np.any(singular):
        bad = int(np.flatnonzero(singular)[0])
        raise SingularCovarianceError(f"{kind} covariance singular at range bin {bad}", range_bin=bad)
    return RangeAngleMap(power, kind, grid.angles)
