"""File-level steps behind the CLI: simulate -> process -> featurize -> train -> evaluate.

Each step reads a manifest and writes its outputs plus a new manifest into its
own output directory; inputs are never modified.
"""

from __future__ import annotations

import logging
import os
from dataclasses import replace
from pathlib import Path

from .archetypes import DatasetScript
from .config import ArrayGeometry, RadarConfig
from .cube import segment_stream
from .errors import ConfigError, SplitError
from .io import (
    DatasetManifest,
    RecordingEntry,
    read_cubes,
    read_recording,
    read_segments,
    write_cubes,
    write_manifest,
    write_recording,
    write_segments,
)
from .labels import CODES
from .learn.metrics import MetricsReport, evaluate
from .learn.model import HarModel, fit_model
from .learn.splits import SplitPlan
from .pipeline import ProcessingOptions, process_recording
from .sim import SceneScript, synthesize_recording

log = logging.getLogger("fmcwhar")


def _rel(path, root):
    return os.path.relpath(Path(path).resolve(), Path(root).resolve())


def _sorted_classes(labels):
    present = set(labels)
    return [c for c in CODES if c in present]


def simulate(cfg: RadarConfig, geom: ArrayGeometry, script, out_dir, scene_id="scene1", subject_id="S1"):
    """Simulate a SceneScript or a DatasetScript into ``out_dir``; returns the manifest path."""
    out_dir = Path(out_dir)
    if isinstance(script, SceneScript):
        scenes = [(scene_id, subject_id, script)]
    elif isinstance(script, DatasetScript):
        scenes = [(s.scene_id, s.subject_id, s.script) for s in script.scenes(cfg)]
    else:
        raise TypeError(f"cannot simulate {type(script).__name__}")
    entries, labels = [], []
    for sid, subj, sc in scenes:
        log.info("simulating %s (%d frames)", sid, sc.n_frames)
        rec = synthesize_recording(cfg, geom, sc)
        path = out_dir / "recordings" / f"{sid}.rcub"
        crc = write_recording(path, cfg, rec.frames, rec.labels, geom)
        entries.append(RecordingEntry(_rel(path, out_dir), sid, subj, crc))
        labels.extend(rec.labels)
    manifest = DatasetManifest(entries, _sorted_classes(labels), out_dir)
    mpath = out_dir / "manifest.json"
    write_manifest(mpath, manifest)
    return mpath


def _relocate(entry: RecordingEntry, old_root, new_root, **updates):
    fields = {}
    for name in ("path", "cubes", "segments"):
        value = getattr(entry, name)
        if value is not None:
            fields[name] = _rel(Path(old_root) / value, new_root)
    fields.update(updates)
    return replace(entry, **fields)


def process(manifest: DatasetManifest, out_dir, options: ProcessingOptions | None = None, cfg_check=None):
    out_dir = Path(out_dir)
    entries = []
    for e in manifest.recordings:
        cfg, geom, frames, labels = read_recording(manifest.resolve(e.path), with_geometry=True)
        if cfg_check is not None and cfg_check != cfg:
            raise ConfigError(f"{e.path} was recorded with a different radar configuration")
        log.info("processing %s (%d frames)", e.path, len(frames))
        cubes, mti = process_recording(cfg, geom, frames, labels, options)
        opts = options or ProcessingOptions()
        path = out_dir / "cubes" / f"{Path(e.path).stem}.npz"
        write_cubes(path, cubes, cfg, opts.grid.angles, mti, recording=e.path)
        entries.append(_relocate(e, manifest.root, out_dir, cubes=_rel(path, out_dir)))
    new = DatasetManifest(entries, manifest.classes, out_dir)
    mpath = out_dir / "manifest.json"
    write_manifest(mpath, new)
    return mpath


def featurize(manifest: DatasetManifest, out_dir):
    out_dir = Path(out_dir)
    entries = []
    for e in manifest.recordings:
        if e.cubes is None:
            raise ConfigError(f"{e.path} has no cube file; run process first")
        cf = read_cubes(manifest.resolve(e.cubes))
        segs = segment_stream(cf.cubes, recording=e.path)
        log.info("%s: %d cubes -> %d segments", e.path, len(cf.cubes), len(segs))
        updates = {"n_segments": len(segs)}
        if segs:
            path = out_dir / "segments" / f"{Path(e.path).stem}.npz"
            write_segments(path, segs, cf.cfg, cf.angles)
            updates["segments"] = _rel(path, out_dir)
        entries.append(_relocate(e, manifest.root, out_dir, **updates))
    new = DatasetManifest(entries, manifest.classes, out_dir)
    mpath = out_dir / "manifest.json"
    write_manifest(mpath, new)
    return mpath


def load_all_segments(manifest: DatasetManifest):
    """``{(recording path, index): Segment}`` plus the radar config of the data."""
    out = {}
    cfg = None
    for e in manifest.recordings:
        if e.n_segments is None:
            raise ConfigError(f"{e.path} has not been featurized")
        if not e.n_segments:
            continue
        segs, seg_cfg, _ = read_segments(manifest.resolve(e.segments))
        if cfg is not None and seg_cfg != cfg:
            raise ConfigError("recordings in the manifest use different radar configurations")
        cfg = seg_cfg
        for i, s in enumerate(segs):
            out[(e.path, i)] = s
    return out, cfg


def partition(segments, plan: SplitPlan, name):
    try:
        return [segments[k] for k in plan.keys(name)]
    except KeyError as exc:
        raise SplitError(f"split plan refers to unknown segment {exc}") from None


def train(manifest, plan: SplitPlan, kind="centroid", features="rd,ra,re", seed=42, pca_components=100, segments=None):
    """Returns ``(model, validation report or None)``."""
    if segments is None:
        segments, cfg = load_all_segments(manifest)
        digest = cfg.digest() if cfg else ""
    else:
        digest = ""
    tr = partition(segments, plan, "train")
    va = partition(segments, plan, "val")
    model = fit_model(tr, va, manifest.classes, kind, features, pca_components, seed, digest)
    report = None
    if va:
        report = evaluate(model.predict(va), model.label_indices(va), len(model.classes))
    return model, report


def evaluate_model(model: HarModel, manifest, plan: SplitPlan, segments=None) -> MetricsReport:
    if segments is None:
        segments, cfg = load_all_segments(manifest)
        if model.config_digest and cfg is not None and cfg.digest() != model.config_digest:
            raise ConfigError("model was trained on data from a different radar configuration")
    test = partition(segments, plan, "test")
    if not test:
        raise SplitError("test partition of the split plan is empty")
    return evaluate(model.predict(test), model.label_indices(test), len(model.classes))
