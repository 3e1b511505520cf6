"""Command-line front end.

    fmcwhar simulate  --input SCRIPT.json|bundled:har4 --output DIR [--config CFG]
    fmcwhar process   --input DIR/manifest.json --output DIR
    fmcwhar featurize --input DIR/manifest.json --output DIR
    fmcwhar train     --input DIR/manifest.json --split csv|lopo --model centroid|mlp --output DIR
    fmcwhar evaluate  --model model.npz --input manifest.json --plan plan.json --output metrics.json
    fmcwhar render    --input cubes.npz --frame K --output DIR

Results go to stdout as JSON; progress and errors go to stderr.  Failures exit
non-zero with a one-line JSON object ``{"error": <category>, "message": ...}``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import workflow
from .archetypes import DatasetScript, bundled_script_path, is_dataset_script
from .beamform import AngleGrid
from .config import ArrayGeometry, RadarConfig, load_config
from .errors import FmcwHarError, SplitError
from .io import atomic_write, export_map_csv, export_map_image, load_manifest, read_cubes
from .learn.model import MODEL_KINDS, load_model, parse_features, save_model
from .learn.splits import load_plans, make_csv_split, make_lopo_split, write_plans
from .pipeline import ProcessingOptions
from .sim import SceneScript

log = logging.getLogger("fmcwhar")


def _config(args):
    if args.config:
        return load_config(args.config)
    return RadarConfig(), ArrayGeometry()


def _emit(obj):
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_simulate(args):
    cfg, geom = _config(args)
    src = args.input
    if src.startswith("bundled:"):
        data = json.loads(bundled_script_path(src.split(":", 1)[1]).read_text())
    else:
        data = json.loads(Path(src).read_text())
    if is_dataset_script(data):
        if args.seed is not None:
            data = dict(data, subjects=[dict(s, seed=s["seed"] + args.seed) for s in data["subjects"]])
        script = DatasetScript.from_dict(data)
    else:
        if args.seed is not None:
            data = dict(data, rng_seed=args.seed)
        script = SceneScript.from_dict(data)
    mpath = workflow.simulate(cfg, geom, script, args.output, args.scene, args.subject)
    manifest = load_manifest(mpath, verify=False)
    _emit({"manifest": str(mpath), "recordings": len(manifest.recordings), "classes": manifest.classes})


def cmd_process(args):
    manifest = load_manifest(args.input)
    cfg_check = _config(args)[0] if args.config else None
    grid = AngleGrid(args.angle_min, args.angle_max, args.angle_step)
    opts = ProcessingOptions(
        mti_alpha=args.alpha,
        loading=args.loading,
        grid=grid,
        scale=args.scale,
        dynamic_range_db=None if args.dynamic_range <= 0 else args.dynamic_range,
    )
    mpath = workflow.process(manifest, args.output, opts, cfg_check)
    _emit({"manifest": str(mpath)})


def cmd_featurize(args):
    manifest = load_manifest(args.input)
    mpath = workflow.featurize(manifest, args.output)
    new = load_manifest(mpath, verify=False)
    _emit({"manifest": str(mpath), "segments": sum(e.n_segments for e in new.recordings)})


def _plans(manifest, split, seed):
    if split == "csv":
        return [make_csv_split(manifest, seed=seed)]
    return make_lopo_split(manifest, seed=seed)


def cmd_train(args):
    manifest = load_manifest(args.input)
    features = parse_features(args.features)
    plans = load_plans(args.plan) if args.plan else _plans(manifest, args.split, args.seed)
    if not 0 <= args.fold < len(plans):
        raise SplitError(f"fold {args.fold} out of range (plan has {len(plans)} folds)")
    plan = plans[args.fold]
    model, report = workflow.train(manifest, plan, args.model, features, args.seed, args.pca)
    out = Path(args.output)
    save_model(out / "model.npz", model)
    if not args.plan:
        write_plans(out / "plan.json", plans)
    summary = {
        "model": str(out / "model.npz"),
        "plan": str(Path(args.plan) if args.plan else out / "plan.json"),
        "fold": args.fold,
        "kind": model.kind,
        "features": list(model.features),
        "train_segments": len(plan.keys("train")),
        "val_segments": len(plan.keys("val")),
        "val_accuracy": None if report is None else report.accuracy,
        "val_macro_f1": None if report is None else report.f1,
    }
    with atomic_write(out / "train.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    _emit(summary)


def cmd_evaluate(args):
    model = load_model(args.model)
    manifest = load_manifest(args.input)
    plans = load_plans(args.plan)
    if not 0 <= args.fold < len(plans):
        raise SplitError(f"fold {args.fold} out of range (plan has {len(plans)} folds)")
    report = workflow.evaluate_model(model, manifest, plans[args.fold])
    result = report.to_dict([c for c in model.classes])
    result.update(kind=model.kind, features=list(model.features), fold=args.fold, split=plans[args.fold].kind)
    out = Path(args.output)
    with atomic_write(out, "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with atomic_write(out.with_suffix(".txt"), "w") as fh:
        fh.write(report.table(model.classes))
    sys.stderr.write(report.table(model.classes))
    _emit(result)


def cmd_render(args):
    cf = read_cubes(args.input)
    frames = [c.frame_index for c in cf.cubes]
    if args.frame not in frames:
        raise SplitError(f"frame {args.frame} not in {args.input} (frames {frames[0]}..{frames[-1]})")
    k = frames.index(args.frame)
    cube = cf.cubes[k]
    out = Path(args.output)
    angles = cf.angles
    step = float(angles[1] - angles[0]) if len(angles) > 1 else 1.0
    n_dopp = cube.rd.shape[0]
    # every image has range bins down the rows
    maps = {
        "rd": (cube.rd.T, "doppler_bin", -(n_dopp // 2), 1.0),
        "ra": (cube.ra, "azimuth_deg", float(angles[0]), step),
        "re": (cube.re, "elevation_deg", float(angles[0]), step),
    }
    written = []
    for name, (m, col_axis, c0, dc) in maps.items():
        stem = out / f"frame{args.frame:05d}_{name}"
        export_map_csv(m, stem.with_suffix(".csv"), "range_bin", col_axis, 0, 1, c0, dc)
        export_map_image(m, stem.with_suffix(".pgm"))
        written += [str(stem.with_suffix(".csv")), str(stem.with_suffix(".pgm"))]
    if cf.mti is not None:
        stem = out / f"frame{args.frame:05d}_mti"
        export_map_csv(np.asarray(cf.mti[k]), stem.with_suffix(".csv"), "channel", "range_bin")
        written.append(str(stem.with_suffix(".csv")))
    _emit({"frame": args.frame, "label": cube.label, "files": written})


def build_parser():
    p = argparse.ArgumentParser(prog="fmcwhar", description="FMCW radar activity-recognition pipeline")
    p.add_argument("-v", "--verbose", action="count", default=0, help="progress on stderr (-vv for debug)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_output=True):
        sp.add_argument("--input", required=True)
        sp.add_argument("--output", required=need_output)
        sp.add_argument("--config", help="radar config (JSON or key=value); defaults to the BGT60TR13C setup")
        sp.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("simulate", help="scene script -> recording(s) + manifest")
    common(sp)
    sp.add_argument("--scene", default="scene1", help="scene id for a single-scene script")
    sp.add_argument("--subject", default="S1", help="subject id for a single-scene script")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("process", help="recordings -> per-frame RD/RA/RE cubes")
    common(sp)
    sp.add_argument("--alpha", type=float, default=0.1, help="MTI weighting factor")
    sp.add_argument("--loading", type=float, default=1e-3, help="diagonal loading relative to trace/2")
    sp.add_argument("--angle-min", type=float, default=-60.0)
    sp.add_argument("--angle-max", type=float, default=60.0)
    sp.add_argument("--angle-step", type=float, default=1.0)
    sp.add_argument("--scale", choices=("db", "linear"), default="db")
    sp.add_argument("--dynamic-range", type=float, default=40.0, help="dB kept below each map peak; <= 0 keeps all")
    sp.set_defaults(func=cmd_process)

    sp = sub.add_parser("featurize", help="cubes -> 5-cube segments")
    common(sp)
    sp.set_defaults(func=cmd_featurize)

    sp = sub.add_parser("train", help="fit normalizer, PCA and classifier on a split")
    common(sp)
    sp.add_argument("--split", choices=("csv", "lopo"), default="csv")
    sp.add_argument("--plan", help="reuse an existing plan.json instead of generating one")
    sp.add_argument("--fold", type=int, default=0)
    sp.add_argument("--model", choices=MODEL_KINDS, default="centroid")
    sp.add_argument("--features", default="rd,ra,re", help="any combination of rd, ra, re")
    sp.add_argument("--pca", type=int, default=100, help="PCA components; 0 disables")
    sp.set_defaults(func=cmd_train, seed=0)

    sp = sub.add_parser("evaluate", help="metrics on the test partition")
    common(sp)
    sp.add_argument("--model", dest="model", required=True)
    sp.add_argument("--plan", required=True)
    sp.add_argument("--fold", type=int, default=0)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("render", help="export RD/RA/RE maps of one frame as CSV and PGM")
    common(sp)
    sp.add_argument("--frame", type=int, default=0)
    sp.set_defaults(func=cmd_render)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except FmcwHarError as exc:
        sys.stderr.write(json.dumps({"error": exc.category, "message": str(exc)}) + "\n")
        return 1
    except (OSError, ValueError) as exc:
        category = "io" if isinstance(exc, OSError) else "invalid"
        sys.stderr.write(json.dumps({"error": category, "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
