"""Command-line entry point: reproducible batch workflows over the
dataset directory layout.

Every run writes a ``run_manifest.json`` (package version, arguments,
config hash) next to its outputs so that a rerun with the same manifest
reproduces results bit-identically.
"""

from __future__ import annotations

import argparse
import csv
import glob
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .grid import Grid, read_grid, resample, write_grid
from .gmf import load_gmf
from .koch import FilterBankSpec, KochParams, koch_forward
from .lightning import cluster_events, project_events, rasterize_lightning, read_events
from .metrics import (binary_f1, confusion, labels_from_channels, macro_f1,
                      stratified)
from .register import RegistrationOffset, apply_offset, register
from .synth import SceneConfig, gen_corpus, gen_scene
from .training import TrainConfig, train_runs
from .zr import class_masks
from .grid import GridGeometry

RESOLUTIONS = (100, 200, 400, 800)
KOCH_MIN_RESOLUTION = 200


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _write_manifest(out_dir, args):
    os.makedirs(out_dir, exist_ok=True)
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    payload = json.dumps(config, sort_keys=True, default=str)
    manifest = {
        "version": __version__,
        "config": config,
        "config_hash": hashlib.sha256(payload.encode()).hexdigest(),
    }
    with open(os.path.join(out_dir, "run_manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2, default=str)


def _swath_dirs(root):
    dirs = sorted(d for d in glob.glob(os.path.join(root, "swath*"))
                  if os.path.isdir(d))
    if not dirs:
        raise DataError(f"no swath directories under {root}")
    return dirs


def cmd_synth(args):
    if args.config:
        with open(args.config) as f:
            cfg = SceneConfig.from_json(f.read())
    else:
        cfg = SceneConfig(seed=args.seed)
    gen_corpus(cfg, args.swaths, args.out)
    _write_manifest(args.out, args)
    print(f"wrote {args.swaths} swaths to {args.out}")
    return 0


def _load_stack(stem):
    grids = {}
    for layer in ("s0", "refl", "wind", "land"):
        path = f"{stem}.{layer}.sgrd"
        if not os.path.exists(path):
            raise DataError(f"missing layer {path}")
        grids[layer] = read_grid(path)
    return grids


def cmd_register(args):
    spec = FilterBankSpec()
    init = KochParams.initial()
    rows = []
    for swath_dir in _swath_dirs(args.data):
        for stem in sorted(set(p.rsplit(".", 2)[0]
                               for p in glob.glob(os.path.join(swath_dir, "*.sgrd")))):
            stack = _load_stack(stem)
            masks = class_masks(stack["refl"])
            feature = koch_forward(stack["s0"], init, spec).channels[0]
            feat_grid = stack["s0"].with_values(feature.astype(np.float32))
            m1 = masks.m1
            try:
                off = register(feat_grid, m1, args.search_radius)
            except ValueError:
                off = RegistrationOffset(0, 0, 0.0)
            rows.append({"swath": os.path.basename(swath_dir),
                         "patch": os.path.basename(stem),
                         "d_row": off.d_row, "d_col": off.d_col,
                         "score": f"{off.score:.4f}"})
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "offsets.csv"), "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["swath", "patch", "d_row", "d_col", "score"])
        w.writeheader()
        w.writerows(rows)
    _write_manifest(args.out, args)
    print(f"registered {len(rows)} patches")
    return 0


def _resampled(grid, resolution_m, method="block_mean"):
    if grid.pixel_spacing_m == resolution_m:
        return grid
    return resample(grid, resolution_m, method)


def cmd_extract(args):
    from .dataset import extract_patches, RejectionLog

    log = RejectionLog()
    os.makedirs(args.out, exist_ok=True)
    manifest_path = os.path.join(args.data, "manifest.csv")
    deltas = {}
    if os.path.exists(manifest_path):
        with open(manifest_path, newline="") as f:
            for row in csv.DictReader(f):
                deltas[(row["swath"], row["patch"])] = float(row["time_delta_s"])
    count = 0
    for swath_dir in _swath_dirs(args.data):
        swath = os.path.basename(swath_dir)
        for stem in sorted(set(p.rsplit(".", 2)[0]
                               for p in glob.glob(os.path.join(swath_dir, "*.sgrd")))):
            stack = _load_stack(stem)
            inc = np.linspace(29.0, 46.0, stack["s0"].cols)
            delta = deltas.get((swath, os.path.basename(stem)), 0.0)
            patch_px = min(args.patch, stack["s0"].rows, stack["s0"].cols)
            patches = extract_patches(
                swath, stack["s0"], stack["refl"], stack["wind"], stack["land"],
                inc, delta, patch_px=patch_px, log=log)
            count += len(patches)
    _write_manifest(args.out, args)
    print(f"kept {count} patches "
          f"(rejected: time={log.time_window} land={log.land} refl={log.reflectivity})")
    return 0


def cmd_split(args):
    from .dataset import histogram_reflectivity, histogram_wind, split_balanced

    swaths = []
    for swath_dir in _swath_dirs(args.data):
        hist = None
        for stem in sorted(set(p.rsplit(".", 2)[0]
                               for p in glob.glob(os.path.join(swath_dir, "*.sgrd")))):
            stack = _load_stack(stem)
            h = np.concatenate([histogram_reflectivity(stack["refl"]),
                                histogram_wind(stack["wind"])])
            hist = h if hist is None else hist + h
        swaths.append((os.path.basename(swath_dir), hist))
    split = split_balanced(swaths, (args.train, args.val, args.test), seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "split.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["swath", "subset"])
        for swath_id, subset in sorted(split.assignment.items()):
            w.writerow([swath_id, subset])
    _write_manifest(args.out, args)
    print(f"assigned {len(swaths)} swaths")
    return 0


def _check_koch_resolution(resolution):
    if resolution < KOCH_MIN_RESOLUTION:
        raise UsageError(
            f"Koch models are only defined down to {KOCH_MIN_RESOLUTION} m/px "
            f"(got {resolution})")


def _load_dataset(data_dir, resolution_m, gmf_path=None):
    from .gmf import Sigma0Grid, incidence_normalize
    from .zr import class_masks

    gmf_spec = load_gmf(gmf_path) if gmf_path else None
    dataset = []
    for swath_dir in _swath_dirs(data_dir):
        for stem in sorted(set(p.rsplit(".", 2)[0]
                               for p in glob.glob(os.path.join(swath_dir, "*.sgrd")))):
            stack = _load_stack(stem)
            s0 = _resampled(stack["s0"], resolution_m)
            if gmf_spec is not None:
                inc = np.linspace(29.0, 46.0, s0.cols)
                s0 = incidence_normalize(Sigma0Grid(s0, inc), gmf_spec)
            refl = _resampled(stack["refl"], resolution_m)
            dataset.append((s0, class_masks(refl)))
    return dataset


def cmd_train_koch(args):
    _check_koch_resolution(args.resolution)
    dataset = _load_dataset(args.data, args.resolution, args.gmf)
    cfg = TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                      batch_size=args.batch, seed=args.seed, runs=args.runs)
    init = KochParams.initial()
    results, summary = train_runs(dataset, cfg, init)
    out_dir = os.path.dirname(os.path.abspath(args.out)) or "."
    os.makedirs(out_dir, exist_ok=True)
    best_params, history = results[0]
    with open(args.out, "w") as f:
        f.write(best_params.to_json(resolution_m=args.resolution))
    hist_path = os.path.splitext(args.out)[0] + "_history.csv"
    with open(hist_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epoch", "train_loss", "val_loss"])
        for e, loss in enumerate(history.train_loss):
            val = history.val_loss[e] if history.val_loss else ""
            w.writerow([e, f"{loss:.8f}", val])
    _write_manifest(out_dir, args)
    mean, std = summary["final_train_loss"]
    print(f"final train loss: {mean:.6f} ({std:.6f}) over {cfg.runs} runs")
    return 0


def cmd_predict(args):
    with open(args.params) as f:
        params, spec, resolution = KochParams.from_json(f.read())
    os.makedirs(args.out, exist_ok=True)
    for swath_dir in _swath_dirs(args.data):
        swath = os.path.basename(swath_dir)
        for stem in sorted(set(p.rsplit(".", 2)[0]
                               for p in glob.glob(os.path.join(swath_dir, "*.sgrd")))):
            stack = _load_stack(stem)
            s0 = _resampled(stack["s0"], resolution or args.resolution)
            pred = koch_forward(s0, params, spec)
            dest = os.path.join(args.out, swath)
            os.makedirs(dest, exist_ok=True)
            for k, suffix in enumerate(("y1", "y3", "y10")):
                g = s0.with_values(pred.channels[k].astype(np.float32))
                write_grid(g, os.path.join(
                    dest, f"{os.path.basename(stem)}.{suffix}.sgrd"))
    _write_manifest(args.out, args)
    print("predictions written")
    return 0


def cmd_eval(args):
    from .grid import distance_to_coast
    from .metrics import ConfusionMatrix

    rows = []
    total_cm = ConfusionMatrix.zeros(4)
    for swath_dir in _swath_dirs(args.truth):
        swath = os.path.basename(swath_dir)
        for stem in sorted(set(p.rsplit(".", 2)[0]
                               for p in glob.glob(os.path.join(swath_dir, "*.sgrd")))):
            stack = _load_stack(stem)
            refl = _resampled(stack["refl"], args.resolution)
            truth = class_masks(refl)
            name = os.path.basename(stem)
            channels = []
            for suffix in ("y1", "y3", "y10"):
                path = os.path.join(args.pred, swath, f"{name}.{suffix}.sgrd")
                if not os.path.exists(path):
                    raise DataError(f"missing prediction {path}")
                channels.append(read_grid(path).values)
            pred_labels = labels_from_channels(np.stack(channels), args.cut)
            land = _resampled(stack["land"], args.resolution, "nearest")
            valid = (land.values == 0) & (truth.valid.values == 1)
            cm = confusion(pred_labels, truth.labels(), 4, valid)
            total_cm = total_cm.merge(cm)
            if args.strat:
                strat_grid = {
                    "wind": _resampled(stack["wind"], args.resolution).values,
                    "coast": distance_to_coast(land).values,
                    "incidence": np.broadcast_to(
                        np.linspace(29.0, 46.0, land.cols), land.values.shape),
                }[args.strat]
                edges = {"wind": [0, 4, 8, 12, 16, 25],
                         "coast": [0, 2, 4, 6, 8, 100],
                         "incidence": [29, 33, 37, 41, 46]}[args.strat]
                curve = stratified((pred_labels > 0).astype(np.uint8),
                                   truth.m1.values, strat_grid, edges, valid)
                for k in range(len(curve.values)):
                    if curve.counts[k]:
                        rows.append(["koch", args.resolution, f"strat_{args.strat}",
                                     f"{curve.edges[k]}-{curve.edges[k+1]}",
                                     f"{curve.values[k]:.4f}", ""])
    score = macro_f1(total_cm)
    rows.insert(0, ["koch", args.resolution, "multiclass_f1", "", f"{score:.4f}", ""])
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "metrics.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["model", "resolution_m", "metric", "threshold", "mean", "std"])
        w.writerows(rows)
    _write_manifest(args.out, args)
    print(f"multiclass F1: {score:.4f}")
    return 0


def cmd_glm_cluster(args):
    events = read_events(args.events)
    geometry = GridGeometry(args.rows, args.cols, args.spacing,
                            (args.lat, args.lon))
    projected, rejected = project_events(events, geometry)
    clusters = cluster_events(projected, geometry)
    times = []
    for cl in clusters:
        member_times = [e.time_s for e in projected if e.pixel in cl]
        times.append(float(np.mean(member_times)))
    mask = rasterize_lightning(clusters, geometry, times, args.time)
    os.makedirs(args.out, exist_ok=True)
    write_grid(mask, os.path.join(args.out, "lightning_mask.sgrd"))
    _write_manifest(args.out, args)
    print(f"{len(clusters)} clusters, {rejected} events outside geometry")
    return 0


def cmd_report(args):
    path = os.path.join(args.data, "metrics.csv")
    if not os.path.exists(path):
        raise DataError(f"no metrics.csv under {args.data}")
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            std = f" ({row['std']})" if row["std"] else ""
            print(f"{row['model']} @{row['resolution_m']} m/px "
                  f"{row['metric']}: {row['mean']}{std}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sarrain",
        description="SAR rain segmentation toolkit",
    )
    parser.add_argument("--workers", type=int,
                        default=int(os.environ.get("SARRAIN_WORKERS", 0)) or None)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--config", help="SceneConfig JSON file")
    p.add_argument("--swaths", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="tile swaths into patches")
    p.add_argument("--data", required=True)
    p.add_argument("--patch", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("split", help="balanced swath-level split")
    p.add_argument("--data", required=True)
    p.add_argument("--train", type=float, default=0.8)
    p.add_argument("--val", type=float, default=0.1)
    p.add_argument("--test", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("register", help="estimate radar-to-SAR offsets")
    p.add_argument("--data", required=True)
    p.add_argument("--search-radius", type=int, default=32)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("train-koch", help="train the differentiable Koch filter")
    p.add_argument("--data", required=True)
    p.add_argument("--resolution", type=int, choices=RESOLUTIONS, default=400)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--gmf", help="GMF coefficient file; when given, sigma0 "
                   "is incidence-normalized before training")
    p.add_argument("--out", required=True, help="output params JSON")
    p.set_defaults(func=cmd_train_koch)

    p = sub.add_parser("predict", help="run the Koch model over swaths")
    p.add_argument("--data", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--resolution", type=int, choices=RESOLUTIONS, default=400)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score predictions against truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--resolution", type=int, choices=RESOLUTIONS, default=400)
    p.add_argument("--cut", type=float, default=0.5)
    p.add_argument("--strat", choices=["wind", "incidence", "coast"])
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("glm-cluster", help="cluster lightning events to a mask")
    p.add_argument("--events", required=True, help="CSV time_s,lat,lon")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--spacing", type=float, required=True)
    p.add_argument("--lat", type=float, default=0.0)
    p.add_argument("--lon", type=float, default=0.0)
    p.add_argument("--time", type=float, default=0.0,
                   help="acquisition time (UNIX seconds)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_glm_cluster)

    p = sub.add_parser("report", help="print a metrics table")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else 2
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as e:
        print(json.dumps({"error": "usage", "message": str(e)}), file=sys.stderr)
        return 2
    except (DataError, OSError, ValueError) as e:
        print(json.dumps({"error": "data", "message": str(e)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
