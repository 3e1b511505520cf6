"""On-disk formats.

Recording file (``.rcub``), all little-endian::

    magic        4s   b"RCUB"
    version      u16
    config_len   u32
    config       utf-8 JSON (radar config + array geometry)
    first_frame  u32
    frame_count  u32
    n_labels     u8,  then per label: u8 length + utf-8 bytes
    crc32        u32  CRC-32 over all frame blocks
    frames       frame_count blocks of C*N*M float32, channel-major, then chirp, then sample
    labels       frame_count u8 indices into the label table

Cube and segment files are ``.npz`` archives carrying a format name and version;
the manifest and split plans are JSON.
"""

from __future__ import annotations

import contextlib
import json
import os
import re
import struct
import tempfile
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ArrayGeometry, RadarConfig, config_from_dict, config_to_dict
from .cube import FeatureCube, Segment
from .dsp import RawFrame
from .errors import ChecksumError, FormatError, ShapeError, TruncatedFileError, VersionError

MAGIC = b"RCUB"
RECORDING_VERSION = 1
CUBES_VERSION = 1
SEGMENTS_VERSION = 1
MANIFEST_VERSION = 1


@contextlib.contextmanager
def atomic_write(path, mode="wb"):
    """Write to a temporary sibling and rename over ``path`` on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


# -- recordings ---------------------------------------------------------------


def _frame_array(frames, cfg):
    arr = np.stack([np.asarray(f.samples if isinstance(f, RawFrame) else f) for f in frames]) if frames else None
    if arr is None:
        return np.zeros((0, *cfg.shape), dtype="<f4")
    if arr.shape[1:] != cfg.shape:
        raise ShapeError(f"frames have shape {arr.shape[1:]}, config expects {cfg.shape}")
    return np.ascontiguousarray(arr, dtype="<f4")


def write_recording(path, cfg: RadarConfig, frames, labels, geom: ArrayGeometry | None = None) -> int:
    """Write a recording atomically and return the CRC-32 of its frame blocks."""
    geom = geom or ArrayGeometry()
    frames = list(frames)
    labels = list(labels)
    if len(labels) != len(frames):
        raise ShapeError(f"{len(frames)} frames but {len(labels)} labels")
    first = frames[0].frame_index if frames and isinstance(frames[0], RawFrame) else 0
    for k, f in enumerate(frames):
        if isinstance(f, RawFrame) and f.frame_index != first + k:
            raise ShapeError(f"frame indices must be consecutive; frame {k} has index {f.frame_index}")
    data = _frame_array(frames, cfg)
    table = sorted(set(labels))
    if len(table) > 255:
        raise FormatError("at most 255 distinct labels per recording")
    lookup = {lab: i for i, lab in enumerate(table)}
    payload = data.tobytes()
    crc = zlib.crc32(payload)
    cfg_blob = json.dumps(config_to_dict(cfg, geom), sort_keys=True).encode()
    with atomic_write(path) as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", RECORDING_VERSION, len(cfg_blob)))
        fh.write(cfg_blob)
        fh.write(struct.pack("<IIB", first, len(frames), len(table)))
        for lab in table:
            b = lab.encode()
            fh.write(struct.pack("<B", len(b)) + b)
        fh.write(struct.pack("<I", crc))
        fh.write(payload)
        fh.write(bytes(lookup[lab] for lab in labels))
    return crc


@dataclass
class RecordingHeader:
    cfg: RadarConfig
    geom: ArrayGeometry
    first_frame: int
    frame_count: int
    label_table: list[str]
    checksum: int
    data_offset: int


def _read_header(buf) -> RecordingHeader:
    def need(pos, n, what):
        if pos + n > len(buf):
            raise TruncatedFileError(f"file ends inside the header ({what})", frame_index=None)

    need(0, 10, "magic")
    if buf[:4] != MAGIC:
        raise FormatError(f"not a recording file (magic {bytes(buf[:4])!r})")
    version, cfg_len = struct.unpack_from("<HI", buf, 4)
    if version != RECORDING_VERSION:
        raise VersionError(f"unsupported recording version {version} (expected {RECORDING_VERSION})")
    pos = 10
    need(pos, cfg_len, "config")
    try:
        cfg, geom = config_from_dict(json.loads(bytes(buf[pos : pos + cfg_len])))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"corrupt config block: {exc}") from None
    pos += cfg_len
    need(pos, 9, "frame count")
    first, count, n_labels = struct.unpack_from("<IIB", buf, pos)
    pos += 9
    table = []
    for _ in range(n_labels):
        need(pos, 1, "label table")
        n = buf[pos]
        need(pos + 1, n, "label table")
        table.append(bytes(buf[pos + 1 : pos + 1 + n]).decode())
        pos += 1 + n
    need(pos, 4, "checksum")
    (crc,) = struct.unpack_from("<I", buf, pos)
    return RecordingHeader(cfg, geom, first, count, table, crc, pos + 4)


def read_recording_header(path) -> RecordingHeader:
    return _read_header(Path(path).read_bytes())


def read_recording(path, with_geometry=False):
    """Returns ``(cfg, frames, labels)``, or ``(cfg, geom, frames, labels)``."""
    buf = Path(path).read_bytes()
    hdr = _read_header(buf)
    C, N, M = hdr.cfg.shape
    block = C * N * M * 4
    start = hdr.data_offset
    available = len(buf) - start
    if available < block * hdr.frame_count:
        bad = available // block
        raise TruncatedFileError(f"{path}: file truncated inside frame {hdr.first_frame + bad}", frame_index=hdr.first_frame + bad)
    if available < (block + 1) * hdr.frame_count:
        bad = available - block * hdr.frame_count
        raise TruncatedFileError(f"{path}: file truncated in the label of frame {hdr.first_frame + bad}", frame_index=hdr.first_frame + bad)
    payload = buf[start : start + block * hdr.frame_count]
    if zlib.crc32(payload) != hdr.checksum:
        raise ChecksumError(f"{path}: frame data checksum mismatch")
    data = np.frombuffer(payload, dtype="<f4").reshape(hdr.frame_count, C, N, M)
    idx = buf[start + block * hdr.frame_count : start + (block + 1) * hdr.frame_count]
    if any(i >= len(hdr.label_table) for i in idx):
        raise FormatError(f"{path}: label index outside the label table")
    labels = [hdr.label_table[i] for i in idx]
    period = 1.0 / hdr.cfg.frame_rate_hz
    frames = [RawFrame(data[k], hdr.first_frame + k, (hdr.first_frame + k) * period) for k in range(hdr.frame_count)]
    if with_geometry:
        return hdr.cfg, hdr.geom, frames, labels
    return hdr.cfg, frames, labels


def recording_checksum(path) -> int:
    """Recompute the CRC-32 of the frame blocks (not the stored value)."""
    buf = Path(path).read_bytes()
    hdr = _read_header(buf)
    block = int(np.prod(hdr.cfg.shape)) * 4
    payload = buf[hdr.data_offset : hdr.data_offset + block * hdr.frame_count]
    if len(payload) < block * hdr.frame_count:
        raise TruncatedFileError(f"{path}: truncated", frame_index=hdr.first_frame + len(payload) // block)
    return zlib.crc32(payload)


# -- manifest -----------------------------------------------------------------


@dataclass
class RecordingEntry:
    path: str
    scene_id: str
    subject_id: str
    checksum: int
    cubes: str | None = None
    segments: str | None = None
    n_segments: int | None = None

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass
class DatasetManifest:
    recordings: list[RecordingEntry]
    classes: list[str]
    root: Path = field(default=Path("."), compare=False)

    def __post_init__(self):
        paths = [r.path for r in self.recordings]
        if len(set(paths)) != len(paths):
            raise FormatError("manifest lists a recording path more than once")

    def resolve(self, rel):
        p = Path(rel)
        return p if p.is_absolute() else self.root / p

    @property
    def scenes(self):
        return sorted({r.scene_id for r in self.recordings})

    @property
    def subjects(self):
        return sorted({r.subject_id for r in self.recordings})

    def to_dict(self):
        return {
            "format": "fmcwhar-manifest",
            "version": MANIFEST_VERSION,
            "classes": list(self.classes),
            "recordings": [r.to_dict() for r in self.recordings],
        }


def write_manifest(path, manifest: DatasetManifest):
    with atomic_write(path, "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2)
        fh.write("\n")


def load_manifest(path, verify=True) -> DatasetManifest:
    path = Path(path)
    data = json.loads(path.read_text())
    if data.get("format") != "fmcwhar-manifest":
        raise FormatError(f"{path} is not a dataset manifest")
    if data.get("version") != MANIFEST_VERSION:
        raise VersionError(f"unsupported manifest version {data.get('version')}")
    try:
        entries = [RecordingEntry(**r) for r in data["recordings"]]
    except TypeError as exc:
        raise FormatError(f"{path}: bad recording entry: {exc}") from None
    manifest = DatasetManifest(entries, list(data["classes"]), path.parent)
    if verify:
        for e in entries:
            if recording_checksum(manifest.resolve(e.path)) != e.checksum:
                raise ChecksumError(f"{e.path}: checksum does not match the manifest")
    return manifest


# -- cubes and segments -------------------------------------------------------


def _npz_write(path, **arrays):
    with atomic_write(path) as fh:
        np.savez(fh, **arrays)


def _npz_read(path, fmt, version):
    with np.load(path, allow_pickle=False) as z:
        arrays = {k: z[k] for k in z.files}
    if str(arrays.get("format")) != fmt:
        raise FormatError(f"{path} is not a {fmt} file")
    if int(arrays["version"]) != version:
        raise VersionError(f"{path}: unsupported {fmt} version {int(arrays['version'])}")
    return arrays


def _labels_array(labels):
    return np.array(["" if lab is None else lab for lab in labels], dtype="U8")


def write_cubes(path, cubes, cfg: RadarConfig, angles, mti=None, recording=""):
    cubes = list(cubes)
    extra = {} if mti is None else {"mti": np.asarray(mti)}
    _npz_write(
        path,
        format=np.array("fmcwhar-cubes"),
        version=np.array(CUBES_VERSION),
        config=np.array(json.dumps(cfg.to_dict(), sort_keys=True)),
        recording=np.array(recording),
        angles=np.asarray(angles, dtype=np.float64),
        frame_index=np.array([c.frame_index for c in cubes], dtype=np.int64),
        labels=_labels_array(c.label for c in cubes),
        rd=np.stack([c.rd for c in cubes]),
        ra=np.stack([c.ra for c in cubes]),
        re=np.stack([c.re for c in cubes]),
        **extra,
    )


@dataclass
class CubeFile:
    cubes: list[FeatureCube]
    cfg: RadarConfig
    angles: np.ndarray
    recording: str
    mti: np.ndarray | None


def read_cubes(path) -> CubeFile:
    a = _npz_read(path, "fmcwhar-cubes", CUBES_VERSION)
    cfg, _ = config_from_dict(json.loads(str(a["config"])))
    cubes = [
        FeatureCube(a["rd"][k], a["ra"][k], a["re"][k], int(a["frame_index"][k]), str(a["labels"][k]) or None)
        for k in range(len(a["frame_index"]))
    ]
    return CubeFile(cubes, cfg, a["angles"], str(a["recording"]), a.get("mti"))


def write_segments(path, segments, cfg: RadarConfig, angles):
    segments = list(segments)
    if not segments:
        raise ShapeError("no segments to write")
    _npz_write(
        path,
        format=np.array("fmcwhar-segments"),
        version=np.array(SEGMENTS_VERSION),
        config=np.array(json.dumps(cfg.to_dict(), sort_keys=True)),
        angles=np.asarray(angles, dtype=np.float64),
        labels=_labels_array(s.label for s in segments),
        recording=np.array([s.recording for s in segments]),
        start_frame=np.array([s.start_frame for s in segments], dtype=np.int64),
        rd=np.stack([s.stack("rd") for s in segments]),
        ra=np.stack([s.stack("ra") for s in segments]),
        re=np.stack([s.stack("re") for s in segments]),
    )


def read_segments(path):
    """Returns ``(segments, cfg, angles)``."""
    a = _npz_read(path, "fmcwhar-segments", SEGMENTS_VERSION)
    cfg, _ = config_from_dict(json.loads(str(a["config"])))
    segs = []
    for k in range(len(a["labels"])):
        label = str(a["labels"][k])
        start = int(a["start_frame"][k])
        cubes = tuple(
            FeatureCube(a["rd"][k, j], a["ra"][k, j], a["re"][k, j], start + j, label) for j in range(a["rd"].shape[1])
        )
        segs.append(Segment(cubes, label, str(a["recording"][k]), start))
    return segs, cfg, a["angles"]


# -- map exports --------------------------------------------------------------


def _finite_2d(m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"maps must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ShapeError("map contains non-finite values")
    return m


def export_map_csv(m, path, row_axis="row", col_axis="col", row_start=0.0, row_step=1.0, col_start=0.0, col_step=1.0):
    """First line is axis metadata as ``key=value`` cells; every following line is one map row."""
    m = _finite_2d(m)
    meta = [
        f"rows={row_axis}",
        f"cols={col_axis}",
        f"n_rows={m.shape[0]}",
        f"n_cols={m.shape[1]}",
        f"row_start={row_start!r}",
        f"row_step={row_step!r}",
        f"col_start={col_start!r}",
        f"col_step={col_step!r}",
    ]
    lines = [",".join(meta)]
    lines.extend(",".join(repr(float(v)) for v in row) for row in m)
    with atomic_write(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def import_map_csv(path):
    """Returns ``(map, metadata dict)``."""
    lines = Path(path).read_text().splitlines()
    meta = dict(cell.split("=", 1) for cell in lines[0].split(","))
    m = np.array([[float(v) for v in line.split(",")] for line in lines[1:] if line])
    shape = (int(meta["n_rows"]), int(meta["n_cols"]))
    if m.shape != shape:
        raise FormatError(f"{path}: expected {shape} values, found {m.shape}")
    return m, meta


def map_to_gray(m):
    m = _finite_2d(m)
    lo, hi = m.min(), m.max()
    if hi == lo:
        return np.full(m.shape, 128, dtype=np.uint8)
    return np.rint((m - lo) / (hi - lo) * 255.0).astype(np.uint8)


def export_map_image(m, path):
    """8-bit binary PGM, min-max scaled; row 0 of the map is the top image row."""
    gray = map_to_gray(m)
    h, w = gray.shape
    with atomic_write(path) as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(gray.tobytes())


def read_pgm(path):
    buf = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", buf)
    if m is None:
        raise FormatError(f"{path} is not a binary PGM")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise FormatError("only 8-bit PGM supported")
    return np.frombuffer(buf[m.end() : m.end() + w * h], dtype=np.uint8).reshape(h, w)
