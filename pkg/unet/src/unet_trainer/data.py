"""Corpus loading: the trainer consumes the on-disk dataset layout only.

A dataset directory holds one subdirectory per swath, each with
``<patch>.s0.sgrd`` backscatter and ``<patch>.{m1,m3,m10}.sgrd`` class
masks; ``manifest.csv`` (and optionally a ``split.csv``) carry
provenance. Nothing else of the producing toolkit is assumed.
"""

from __future__ import annotations

import csv
import glob
import os

import numpy as np

from sarrain.grid import read_grid


def load_split(path) -> dict[str, str]:
    """Read a 'swath,subset' CSV into a mapping."""
    out = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out[row["swath"]] = row["subset"]
    return out


def load_corpus(data_dir, subset: str | None = None,
                split: dict[str, str] | None = None):
    """Return a list of (sigma0 array, 3-channel target array) pairs.

    With ``subset`` and ``split`` given, only swaths assigned to that
    subset are loaded.
    """
    pairs = []
    for swath_dir in sorted(glob.glob(os.path.join(data_dir, "swath*"))):
        if not os.path.isdir(swath_dir):
            continue
        swath = os.path.basename(swath_dir)
        if subset is not None and split is not None \
                and split.get(swath) != subset:
            continue
        stems = sorted(set(p.rsplit(".", 2)[0]
                           for p in glob.glob(os.path.join(swath_dir, "*.sgrd"))))
        for stem in stems:
            s0 = read_grid(f"{stem}.s0.sgrd").values.astype(np.float32)
            masks = [read_grid(f"{stem}.{m}.sgrd").values
                     for m in ("m1", "m3", "m10")]
            target = np.stack(masks).astype(np.float32)
            pairs.append((s0, target))
    if not pairs:
        raise ValueError(f"no training pairs found under {data_dir}")
    return pairs
