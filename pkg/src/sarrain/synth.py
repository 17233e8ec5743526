"""Deterministic synthetic scenes with known rain truth.

Stands in for the proprietary SAR / weather-radar colocations: each
scene is a stack of (sigma0, reflectivity, wind, land) grids plus exact
class masks derived from the underlying rain-rate field, all
reproducible bit-for-bit from the seed.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field, asdict, replace

import numpy as np

from .grid import Grid
from .register import RegistrationOffset, _translate
from .zr import ClassMasks, THRESHOLDS_MMH, ZrParams, class_masks, dbz_from_rainrate

RAIN_FREE_DBZ = -30.0


@dataclass(frozen=True)
class SceneConfig:
    seed: int = 0
    size_px: int = 256
    pixel_spacing_m: float = 400.0
    wind_mps: float = 8.0
    n_cells: int = 3
    cell_rate_range_mmh: tuple[float, float] = (0.5, 20.0)
    cell_radius_range_px: tuple[float, float] = (8.0, 32.0)
    bright_gain: float = 0.5          # sigma0 factor 1 + gain * min(R/10, 1)
    contrast_model: str = "saturating"  # or "linear": 1 + gain * R/10, unclamped
    dark_ring_factor: float = 1.0     # < 1 enables an attenuation ring
    speckle_looks: int = 16
    coast_fraction: float = 0.0       # land half-plane width as a fraction of cols
    base_sigma0: float = 0.6
    wind_slope: float = 0.04          # base model: base_sigma0 + slope * wind

    @classmethod
    def from_json(cls, text: str) -> "SceneConfig":
        d = json.loads(text)
        for k in ("cell_rate_range_mmh", "cell_radius_range_px"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass(frozen=True)
class Scene:
    sigma0: Grid
    reflectivity: Grid
    wind: Grid
    land: Grid
    truth: ClassMasks
    rate_mmh: np.ndarray


def _rain_rate_field(cfg: SceneConfig, rng) -> np.ndarray:
    n = cfg.size_px
    yy, xx = np.mgrid[0:n, 0:n].astype(np.float64)
    rate = np.zeros((n, n))
    for _ in range(cfg.n_cells):
        cy, cx = rng.uniform(0.15 * n, 0.85 * n, size=2)
        peak = rng.uniform(*cfg.cell_rate_range_mmh)
        radius = rng.uniform(*cfg.cell_radius_range_px)
        rate += peak * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * radius**2))
    return rate


def gen_scene(cfg: SceneConfig, zr: ZrParams = ZrParams()) -> Scene:
    """Generate one labeled scene; truth masks come from the exact
    rain-rate field, never from the (noisy) reflectivity."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.size_px
    rate = _rain_rate_field(cfg, rng)

    refl = np.where(rate > 1e-6, dbz_from_rainrate(np.maximum(rate, 1e-6), zr),
                    RAIN_FREE_DBZ)

    base = cfg.base_sigma0 + cfg.wind_slope * cfg.wind_mps
    if cfg.contrast_model == "linear":
        contrast = 1.0 + cfg.bright_gain * rate / 10.0
    elif cfg.contrast_model == "saturating":
        contrast = 1.0 + cfg.bright_gain * np.minimum(rate / 10.0, 1.0)
    else:
        raise ValueError(f"unknown contrast model {cfg.contrast_model!r}")
    if cfg.dark_ring_factor < 1.0:
        ring = (rate > 0.2) & (rate < 1.0)
        contrast = np.where(ring, cfg.dark_ring_factor, contrast)
    looks = cfg.speckle_looks
    speckle = rng.gamma(looks, 1.0 / looks, size=(n, n))
    sigma0 = base * contrast * speckle

    land = np.zeros((n, n), dtype=np.uint8)
    if cfg.coast_fraction > 0:
        land[:, : int(round(cfg.coast_fraction * n))] = 1

    wind = np.full((n, n), cfg.wind_mps, dtype=np.float32)

    def grid(v, nodata=-9999.0):
        return Grid(np.asarray(v, dtype=np.float32), cfg.pixel_spacing_m,
                    nodata=nodata)

    refl_grid = grid(refl)
    truth_masks = []
    for t in THRESHOLDS_MMH:
        truth_masks.append(Grid((rate >= t).astype(np.uint8),
                                cfg.pixel_spacing_m, nodata=255.0))
    valid = Grid(np.ones((n, n), dtype=np.uint8), cfg.pixel_spacing_m, nodata=255.0)
    truth = ClassMasks(*truth_masks, valid)

    return Scene(grid(sigma0), refl_grid, grid(wind),
                 Grid(land, cfg.pixel_spacing_m, nodata=255.0), truth, rate)


def gen_corpus(template: SceneConfig, n_swaths: int, out_dir,
               cells_per_swath=None, inject_shifts: bool = True,
               max_shift_px: int = 8, zr: ZrParams = ZrParams()):
    """Emit a dataset directory in the standard layout.

    One scene per swath, stored as <root>/<swath>/<patch>.{s0,refl,wind,
    land}.sgrd plus the three class-mask files and a manifest CSV. A known
    integer shift is injected on the reflectivity layer of each swath so
    that registration can be tested against ground truth.
    """
    from .grid import write_grid

    if n_swaths < 3:
        raise ValueError("need at least 3 swaths")
    os.makedirs(out_dir, exist_ok=True)
    manifest = []
    for s in range(n_swaths):
        swath_id = f"swath{s:03d}"
        swath_dir = os.path.join(out_dir, swath_id)
        os.makedirs(swath_dir, exist_ok=True)
        rng = np.random.default_rng([template.seed, s])
        cells = (cells_per_swath(s) if callable(cells_per_swath)
                 else template.n_cells if cells_per_swath is None
                 else cells_per_swath)
        cfg = replace(template, seed=int(rng.integers(2**31)), n_cells=cells,
                      wind_mps=float(rng.uniform(2.0, 18.0)))
        scene = gen_scene(cfg, zr)
        d_row = int(rng.integers(-max_shift_px, max_shift_px + 1)) if inject_shifts else 0
        d_col = int(rng.integers(-max_shift_px, max_shift_px + 1)) if inject_shifts else 0
        refl = scene.reflectivity
        shifted = refl.with_values(
            _translate(refl.values, d_row, d_col, np.float32(refl.nodata)))
        patch_id = "patch000"
        stem = os.path.join(swath_dir, patch_id)
        write_grid(scene.sigma0, stem + ".s0.sgrd")
        write_grid(shifted, stem + ".refl.sgrd")
        write_grid(scene.wind, stem + ".wind.sgrd")
        write_grid(scene.land, stem + ".land.sgrd")
        for suffix, mask in (("m1", scene.truth.m1), ("m3", scene.truth.m3),
                             ("m10", scene.truth.m10)):
            write_grid(mask, f"{stem}.{suffix}.sgrd")
        time_delta = float(rng.uniform(-1100, 1100))
        land_frac = float(scene.land.values.mean())
        max_dbz = float(scene.reflectivity.values.max())
        manifest.append({"swath": swath_id, "patch": patch_id, "subset": "",
                         "time_delta_s": f"{time_delta:.1f}",
                         "d_row": d_row, "d_col": d_col,
                         "land_frac": f"{land_frac:.4f}",
                         "max_dbz": f"{max_dbz:.2f}"})
    with open(os.path.join(out_dir, "manifest.csv"), "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(manifest[0].keys()))
        writer.writeheader()
        writer.writerows(manifest)
    return manifest
