"""Cross-scene and leave-one-person-out split generators.

Units of assignment are segments, addressed as ``(recording path, segment index)``.
Held-out groups (scenes or one subject) go to test whole; everything else is
shuffled with the given seed and cut into train/validation.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import SplitError
from ..io import DatasetManifest, atomic_write

PARTITIONS = ("train", "val", "test")


@dataclass
class SplitPlan:
    kind: str  # "csv" or "lopo"
    fold: int
    held_out: list[str]  # test scenes (csv) or the test subject (lopo)
    assignment: dict  # (recording, segment index) -> "train" | "val" | "test"

    def keys(self, partition):
        if partition not in PARTITIONS:
            raise SplitError(f"unknown partition {partition!r}")
        return sorted(k for k, p in self.assignment.items() if p == partition)

    def to_dict(self):
        return {
            "format": "fmcwhar-split",
            "kind": self.kind,
            "fold": self.fold,
            "held_out": list(self.held_out),
            "assignment": [
                {"recording": rec, "segment": int(idx), "partition": part}
                for (rec, idx), part in sorted(self.assignment.items())
            ],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != "fmcwhar-split":
            raise SplitError("not a split plan")
        assignment = {(a["recording"], int(a["segment"])): a["partition"] for a in data["assignment"]}
        return cls(data["kind"], int(data["fold"]), list(data["held_out"]), assignment)


def write_plans(path, plans):
    with atomic_write(path, "w") as fh:
        json.dump([p.to_dict() for p in plans], fh, indent=1)
        fh.write("\n")


def load_plans(path):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = [data]
    return [SplitPlan.from_dict(d) for d in data]


def _segment_keys(manifest: DatasetManifest, keep):
    keys = []
    for rec in manifest.recordings:
        if rec.n_segments is None:
            raise SplitError(f"{rec.path}: segment count unknown; featurize the recording first")
        if keep(rec):
            keys.extend((rec.path, i) for i in range(rec.n_segments))
    return keys


def _train_val(keys, train_fraction, rng):
    if not 0.0 < train_fraction <= 1.0:
        raise SplitError(f"train fraction must lie in (0, 1], got {train_fraction}")
    keys = sorted(keys)
    order = rng.permutation(len(keys))
    n_train = int(round(train_fraction * len(keys)))
    out = {}
    for rank, i in enumerate(order):
        out[keys[i]] = "train" if rank < n_train else "val"
    if n_train == len(keys):
        warnings.warn("validation partition is empty", RuntimeWarning, stacklevel=3)
    return out


def make_csv_split(manifest: DatasetManifest, train_fraction=0.8, n_test_scenes=2, seed=0) -> SplitPlan:
    scenes = manifest.scenes
    if len(scenes) < 3:
        raise SplitError(f"cross-scene split needs at least 3 scenes, manifest has {len(scenes)}")
    if not 1 <= n_test_scenes < len(scenes):
        raise SplitError(f"cannot hold out {n_test_scenes} of {len(scenes)} scenes")
    rng = np.random.default_rng(seed)
    test_scenes = sorted(str(s) for s in rng.choice(scenes, size=n_test_scenes, replace=False))
    held = set(test_scenes)
    assignment = dict.fromkeys(_segment_keys(manifest, lambda r: r.scene_id in held), "test")
    assignment.update(_train_val(_segment_keys(manifest, lambda r: r.scene_id not in held), train_fraction, rng))
    return SplitPlan("csv", 0, test_scenes, assignment)


def make_lopo_split(manifest: DatasetManifest, train_fraction=0.8, seed=0) -> list[SplitPlan]:
    subjects = manifest.subjects
    if len(subjects) < 2:
        raise SplitError("leave-one-person-out needs at least two subjects")
    plans = []
    for fold, subject in enumerate(subjects):
        rng = np.random.default_rng([seed, fold])
        assignment = dict.fromkeys(_segment_keys(manifest, lambda r: r.subject_id == subject), "test")
        assignment.update(_train_val(_segment_keys(manifest, lambda r: r.subject_id != subject), train_fraction, rng))
        plans.append(SplitPlan("lopo", fold, [subject], assignment))
    return plans
