"""Command-line entry points: ``unet-train`` and ``unet-predict``.

Flags mirror the producing toolkit's CLI; data flows only through the
grid files and CSVs on disk.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys
import tempfile

import numpy as np

from sarrain.grid import read_grid, write_grid

from .data import load_corpus, load_split
from .model import UNetConfig
from .predict import predict_mosaic
from .train import load_weights, save_history, save_weights, train_unet

RESOLUTIONS = (100, 200, 400, 800)


def _default_batch(resolution_m: int) -> int:
    return 16 if resolution_m == 100 else 32


def _atomic_write_grid(grid, path):
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".sgrd")
    os.close(fd)
    try:
        write_grid(grid, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main_train(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="unet-train",
        description="train the rain segmentation network on a dataset directory")
    parser.add_argument("--data", required=True)
    parser.add_argument("--resolution", type=int, choices=RESOLUTIONS,
                        default=400)
    parser.add_argument("--lr", type=float, default=1e-5)
    parser.add_argument("--epochs", type=int, default=500)
    parser.add_argument("--batch", type=int, default=None,
                        help="default 32, forced to 16 at 100 m/px")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--split", help="swath,subset CSV; train on 'train', "
                        "validate on 'validation'")
    parser.add_argument("--out", required=True, help="weights output path")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else 2
    try:
        batch = args.batch if args.batch is not None \
            else _default_batch(args.resolution)
        cfg = UNetConfig(learning_rate=args.lr, epochs=args.epochs,
                         batch_size=batch, seed=args.seed,
                         resolution_m=args.resolution)
        split = load_split(args.split) if args.split else None
        pairs = load_corpus(args.data, "train" if split else None, split)
        val = (load_corpus(args.data, "validation", split)
               if split else None)
        model, history = train_unet(pairs, cfg, val_pairs=val)
        save_weights(model, args.out)
        save_history(history, os.path.splitext(args.out)[0] + "_history.csv")
        print(f"final train loss: {history['train_loss'][-1]:.6f} "
              f"(initial {history['train_loss'][0]:.6f})")
        return 0
    except ValueError as e:
        print(json.dumps({"error": "usage", "message": str(e)}),
              file=sys.stderr)
        return 2
    except OSError as e:
        print(json.dumps({"error": "data", "message": str(e)}),
              file=sys.stderr)
        return 1


def main_predict(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="unet-predict",
        description="write per-threshold probability grids for every swath")
    parser.add_argument("--data", required=True)
    parser.add_argument("--weights", required=True)
    parser.add_argument("--tile", type=int, default=256)
    parser.add_argument("--margin", type=int, default=72)
    parser.add_argument("--out", required=True)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else 2
    try:
        model = load_weights(args.weights)
        swath_dirs = sorted(d for d in
                            glob.glob(os.path.join(args.data, "swath*"))
                            if os.path.isdir(d))
        if not swath_dirs:
            raise ValueError(f"no swath directories under {args.data}")
        for swath_dir in swath_dirs:
            swath = os.path.basename(swath_dir)
            for path in sorted(glob.glob(os.path.join(swath_dir, "*.s0.sgrd"))):
                s0 = read_grid(path)
                channels = predict_mosaic(model, s0, args.tile, args.margin)
                name = os.path.basename(path)[:-len(".s0.sgrd")]
                for k, suffix in enumerate(("y1", "y3", "y10")):
                    g = s0.with_values(channels[k].astype(np.float32))
                    _atomic_write_grid(
                        g, os.path.join(args.out, swath,
                                        f"{name}.{suffix}.sgrd"))
        print("predictions written")
        return 0
    except ValueError as e:
        print(json.dumps({"error": "usage", "message": str(e)}),
              file=sys.stderr)
        return 2
    except OSError as e:
        print(json.dumps({"error": "data", "message": str(e)}),
              file=sys.stderr)
        return 1
