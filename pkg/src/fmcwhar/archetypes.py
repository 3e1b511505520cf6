"""Synthetic activity archetypes and multi-scene dataset scripts.

The human activities cannot be simulated faithfully with point targets; each
archetype instead exercises one discriminative axis of the feature maps:

    A1 walking            moving target at walking pace, turns at the room edges
    A2/A3 sitting         static target with micro-motion on a chair, upper elevation
    A4/A5 lying           static target with micro-motion on a bed, low elevation
    A6 empty room         noise only
    A7 transition         piecewise velocity (slow approach, then still)

A2 and A4 share the same range band so only elevation separates them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .config import RadarConfig, derive_params
from .errors import SimulationError
from .labels import check_label
from .sim import Interval, PointTarget, SceneScript

MICRO_MOTION_STD = 0.05
WALK_SPEED = (1.0, 1.5)
WALK_ELEVATION = (5.0, 15.0)  # standing torso sits above a seated one
WALK_RANGE = (0.4, 0.3)  # margin from the radar, margin from max range

# furniture anchors (range m, azimuth deg, elevation deg); the chair and the bed share a range
FURNITURE = {
    "A2": (2.2, 10.0, -5.0),  # chair
    "A3": (1.25, -10.0, -5.0),  # chair near the radar
    "A4": (2.2, 10.0, -35.0),  # bed
    "A5": (3.4, -20.0, -40.0),  # bed far away
}
PLACEMENT_JITTER = (0.2, 6.0, 4.0)  # per-scene spread around the anchor


def _static(rng, label, amplitude):
    anchor = FURNITURE[label]
    r, az, el = (float(c + rng.uniform(-j, j)) for c, j in zip(anchor, PLACEMENT_JITTER))
    return PointTarget(range_m=r, azimuth_deg=az, elevation_deg=el, amplitude=amplitude)


def _walk(label, start, n_frames, rng, max_range, period, amplitude):
    """Back-and-forth walk at a steady pace, turning at the edges of the room."""
    lo, hi = WALK_RANGE[0], max_range - WALK_RANGE[1]
    speed = float(rng.uniform(*WALK_SPEED))
    r = float(rng.uniform(lo, hi))
    v = speed if rng.integers(2) else -speed
    az = float(rng.uniform(-30, 30))
    el = float(rng.uniform(*WALK_ELEVATION))
    out = []
    seg_start, seg_r = start, r
    for f in range(start, start + n_frames):
        nxt = r + v * period
        if not lo <= nxt <= hi:
            if f > seg_start:
                out.append(Interval(seg_start, f, label, (PointTarget(seg_r, v, az, el, amplitude),)))
                seg_start, seg_r = f, r
            v = -v
            nxt = r + v * period
        r = nxt
    out.append(Interval(seg_start, start + n_frames, label, (PointTarget(seg_r, v, az, el, amplitude),)))
    return out


def activity_intervals(label, start, n_frames, rng, cfg: RadarConfig, amplitude=1.0):
    """Intervals (usually one) realising ``label`` over ``n_frames`` frames."""
    check_label(label)
    dp = derive_params(cfg)
    period = 1.0 / cfg.frame_rate_hz
    stop = start + n_frames
    jitter = MICRO_MOTION_STD
    if label == "A1":
        return _walk(label, start, n_frames, rng, dp.max_range_m, period, amplitude)
    if label in FURNITURE:
        return [Interval(start, stop, label, (_static(rng, label, amplitude),), jitter)]
    if label == "A6":
        return [Interval(start, stop, label, ())]
    # A7: slow approach for the first half, then still
    half = max(1, n_frames // 2)
    v = -0.3
    r0 = float(rng.uniform(2.0, 3.0))
    el = float(rng.uniform(-30, -5))
    moving = PointTarget(r0, v, float(rng.uniform(-20, 20)), el, amplitude)
    still = PointTarget(r0 + v * half * period, 0.0, moving.azimuth_deg, el, amplitude)
    out = [Interval(start, start + half, label, (moving,))]
    if n_frames > half:
        out.append(Interval(start + half, stop, label, (still,), jitter))
    return out


@dataclass(frozen=True)
class SceneSpec:
    scene_id: str
    subject_id: str
    script: SceneScript


@dataclass(frozen=True)
class DatasetScript:
    name: str
    activities: tuple[str, ...]
    subjects: tuple[tuple[str, int], ...]  # (subject id, seed)
    scenes_per_subject: int
    frames_per_activity: tuple[int, int]  # inclusive bounds
    noise_std: float

    @classmethod
    def from_dict(cls, data):
        fpa = data["frames_per_activity"]
        if isinstance(fpa, int):
            fpa = (fpa, fpa)
        subjects = tuple((s["id"], int(s["seed"])) for s in data["subjects"])
        return cls(
            name=data.get("name", "dataset"),
            activities=tuple(check_label(a) for a in data["activities"]),
            subjects=subjects,
            scenes_per_subject=int(data["scenes_per_subject"]),
            frames_per_activity=(int(fpa[0]), int(fpa[1])),
            noise_std=float(data["noise_std"]),
        )

    def scenes(self, cfg: RadarConfig) -> list[SceneSpec]:
        """Expand into concrete scene scripts; fully determined by the subject seeds."""
        out = []
        for subject_id, seed in self.subjects:
            subject_rng = np.random.default_rng([seed, 0])
            # per-subject reflectivity, so held-out subjects differ systematically
            amplitude = float(subject_rng.uniform(0.7, 1.3))
            for k in range(self.scenes_per_subject):
                rng = np.random.default_rng([seed, k + 1])
                order = list(self.activities)
                rng.shuffle(order)
                intervals = []
                frame = 0
                for label in order:
                    lo, hi = self.frames_per_activity
                    n = int(rng.integers(lo, hi + 1))
                    intervals.extend(activity_intervals(label, frame, n, rng, cfg, amplitude))
                    frame += n
                script = SceneScript(tuple(intervals), self.noise_std, int(seed) * 1000 + k)
                out.append(SceneSpec(f"{subject_id}-scene{k + 1}", subject_id, script))
        return out


def is_dataset_script(data):
    return "subjects" in data and "activities" in data


def bundled_script_path(name="har4"):
    return resources.files("fmcwhar") / "data" / f"{name}.json"


def load_bundled(name="har4") -> DatasetScript:
    return DatasetScript.from_dict(json.loads(bundled_script_path(name).read_text()))


def load_dataset_script(path) -> DatasetScript:
    return DatasetScript.from_dict(json.loads(Path(path).read_text()))
