"""Radar and antenna-array parameters plus the physical quantities derived from them.

Defaults reproduce the BGT60TR13C setup: 61-62 GHz sweep, 2 Msps ADC, 128 chirps
per frame, 3 receivers, 10 frames/s.  Samples per chirp is not published for that
device configuration; ``M = 64`` is the only power of two for which a 15 cm range
resolution gives the quoted 4.8 m maximum range.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0


def _is_pow2(n):
    return isinstance(n, int) and n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class RadarConfig:
    start_frequency_hz: float = 61e9
    end_frequency_hz: float = 62e9
    samples_per_chirp: int = 64
    chirps_per_frame: int = 128
    rx_channels: int = 3
    frame_rate_hz: float = 10.0
    chirp_duration_s: float | None = None  # None -> samples_per_chirp / adc_rate_sps
    adc_rate_sps: float = 2e6
    tx_power_dbm: float = 5.0

    def __post_init__(self):
        if self.chirp_duration_s is None:
            object.__setattr__(self, "chirp_duration_s", self.samples_per_chirp / self.adc_rate_sps)
        self.validate()

    def validate(self):
        if not self.end_frequency_hz > self.start_frequency_hz:
            raise ConfigError(
                f"bandwidth must be positive (start {self.start_frequency_hz} Hz, end {self.end_frequency_hz} Hz)"
            )
        for name in ("samples_per_chirp", "chirps_per_frame"):
            if not _is_pow2(getattr(self, name)):
                raise ConfigError(f"{name} must be a power of two, got {getattr(self, name)!r}")
        if not isinstance(self.rx_channels, int) or self.rx_channels < 1:
            raise ConfigError(f"rx_channels must be >= 1, got {self.rx_channels!r}")
        for name in ("frame_rate_hz", "adc_rate_sps", "chirp_duration_s"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        # small slack so M / fs round-trips through float arithmetic
        if self.chirp_duration_s * self.adc_rate_sps < self.samples_per_chirp * (1 - 1e-12):
            raise ConfigError("chirp too short to acquire samples_per_chirp at adc_rate_sps")

    @property
    def shape(self):
        """Raw frame shape ``(C, N, M)``."""
        return (self.rx_channels, self.chirps_per_frame, self.samples_per_chirp)

    def to_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        """Stable hash identifying this configuration inside model artifacts."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class ArrayGeometry:
    """Receiver pairs used for angle estimation.

    Each pair is ``(reference, displaced)``: the displaced element sees the
    inter-element phase shift.  The defaults put RX3 (index 2), the corner of the
    L, as reference for both the horizontal (RX1) and vertical (RX2) legs.
    """

    azimuth_pair: tuple[int, int] = (2, 0)
    elevation_pair: tuple[int, int] = (2, 1)
    element_spacing_wavelengths: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "azimuth_pair", tuple(int(i) for i in self.azimuth_pair))
        object.__setattr__(self, "elevation_pair", tuple(int(i) for i in self.elevation_pair))
        for name in ("azimuth_pair", "elevation_pair"):
            pair = getattr(self, name)
            if len(pair) != 2 or pair[0] == pair[1] or min(pair) < 0:
                raise ConfigError(f"{name} must hold two distinct non-negative channel indices, got {pair}")
        if not self.element_spacing_wavelengths > 0:
            raise ConfigError("element_spacing_wavelengths must be positive")

    def check(self, cfg: RadarConfig):
        for name in ("azimuth_pair", "elevation_pair"):
            if max(getattr(self, name)) >= cfg.rx_channels:
                raise ConfigError(f"{name} {getattr(self, name)} exceeds rx_channels={cfg.rx_channels}")

    def pair(self, kind):
        if kind == "azimuth":
            return self.azimuth_pair
        if kind == "elevation":
            return self.elevation_pair
        raise ConfigError(f"unknown map kind {kind!r}")

    def to_dict(self):
        return {
            "azimuth_pair": list(self.azimuth_pair),
            "elevation_pair": list(self.elevation_pair),
            "element_spacing_wavelengths": self.element_spacing_wavelengths,
        }


@dataclass(frozen=True)
class DerivedParams:
    bandwidth_hz: float
    range_resolution_m: float
    n_range_bins: int
    max_range_m: float
    wavelength_m: float
    velocity_resolution_mps: float
    max_unambiguous_velocity_mps: float
    center_frequency_hz: float
    frame_period_s: float


def derive_params(cfg: RadarConfig) -> DerivedParams:
    cfg.validate()
    bandwidth = cfg.end_frequency_hz - cfg.start_frequency_hz
    range_res = SPEED_OF_LIGHT / (2.0 * bandwidth)
    n_bins = cfg.samples_per_chirp // 2
    fc = 0.5 * (cfg.start_frequency_hz + cfg.end_frequency_hz)
    wavelength = SPEED_OF_LIGHT / fc
    return DerivedParams(
        bandwidth_hz=bandwidth,
        range_resolution_m=range_res,
        n_range_bins=n_bins,
        max_range_m=range_res * n_bins,
        wavelength_m=wavelength,
        velocity_resolution_mps=wavelength / (2.0 * cfg.chirps_per_frame * cfg.chirp_duration_s),
        max_unambiguous_velocity_mps=wavelength / (4.0 * cfg.chirp_duration_s),
        center_frequency_hz=fc,
        frame_period_s=1.0 / cfg.frame_rate_hz,
    )


_INT_FIELDS = {"samples_per_chirp", "chirps_per_frame", "rx_channels"}
_PAIR_FIELDS = {"azimuth_pair", "elevation_pair"}
_RADAR_FIELDS = {f.name for f in dataclasses.fields(RadarConfig)}
_GEOM_FIELDS = {f.name for f in dataclasses.fields(ArrayGeometry)}


def _parse_kv(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in _PAIR_FIELDS:
            out[key] = [int(v) for v in value.split(",")]
        elif key in _INT_FIELDS:
            out[key] = int(value)
        else:
            try:
                out[key] = float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} is not a number: {value!r}") from None
    return out


def config_from_dict(data: dict) -> tuple[RadarConfig, ArrayGeometry]:
    unknown = set(data) - _RADAR_FIELDS - _GEOM_FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    radar_kw = {k: v for k, v in data.items() if k in _RADAR_FIELDS}
    for k in _INT_FIELDS & radar_kw.keys():
        if float(radar_kw[k]) != int(radar_kw[k]):
            raise ConfigError(f"{k} must be an integer")
        radar_kw[k] = int(radar_kw[k])
    geom_kw = {k: v for k, v in data.items() if k in _GEOM_FIELDS}
    try:
        cfg = RadarConfig(**radar_kw)
        geom = ArrayGeometry(**geom_kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    geom.check(cfg)
    return cfg, geom


def load_config(path) -> tuple[RadarConfig, ArrayGeometry]:
    """Read a JSON or ``key = value`` config file; unknown keys are rejected."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    else:
        data = _parse_kv(text)
    return config_from_dict(data)


def config_to_dict(cfg: RadarConfig, geom: ArrayGeometry | None = None) -> dict:
    out = cfg.to_dict()
    if geom is not None:
        out.update(geom.to_dict())
    return out
