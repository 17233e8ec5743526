"""Patch dataset construction: extraction with rejection rules, balanced
swath-level splits and registration-offset statistics.

Patches are 256x256 co-registered stacks cut at half-width stride.
Splits are assigned per swath (never per patch, to avoid leakage between
overlapping tiles) while balancing the per-bin pixel fractions of
reflectivity classes and wind speed across subsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, tile_offsets
from .register import RegistrationOffset
from .zr import THRESHOLDS_DBZ

PATCH_PX = 256
MAX_TIME_DELTA_S = 1200.0
MAX_LAND_FRACTION = 0.5
MIN_MAX_REFLECTIVITY_DBZ = 25.0

WIND_BIN_EDGES = (0.0, 4.0, 8.0, 12.0, 16.0, np.inf)
REFLECTIVITY_BIN_EDGES = (-np.inf,) + THRESHOLDS_DBZ + (np.inf,)

SUBSETS = ("train", "validation", "test")


@dataclass(frozen=True)
class Patch:
    """A co-registered multi-layer stack with provenance."""

    sigma0_norm: Grid
    reflectivity: Grid
    wind: Grid
    land: Grid
    incidence_deg: np.ndarray
    swath_id: str
    patch_id: str
    row_offset: int
    col_offset: int
    offset_applied: RegistrationOffset
    time_delta_s: float

    def __post_init__(self):
        shapes = {g.values.shape for g in
                  (self.sigma0_norm, self.reflectivity, self.wind, self.land)}
        if len(shapes) != 1:
            raise ValueError("patch layers must share geometry")
        if abs(self.time_delta_s) > MAX_TIME_DELTA_S:
            raise ValueError("colocation outside the 20-minute window")
        if self.land_fraction() > MAX_LAND_FRACTION:
            raise ValueError("more than half the patch is land")
        if self.max_reflectivity() < MIN_MAX_REFLECTIVITY_DBZ:
            raise ValueError("patch contains no significant reflectivity")

    def land_fraction(self) -> float:
        return float((self.land.values == 1).mean())

    def max_reflectivity(self) -> float:
        v = self.reflectivity.values[self.reflectivity.valid_mask()]
        return float(v.max()) if v.size else -np.inf


@dataclass
class RejectionLog:
    kept: int = 0
    time_window: int = 0
    land: int = 0
    reflectivity: int = 0


def extract_patches(swath_id: str, sigma0_norm: Grid, reflectivity: Grid,
                    wind: Grid, land: Grid, incidence_deg,
                    time_delta_s: float,
                    offset: RegistrationOffset = RegistrationOffset(0, 0, 0.0),
                    patch_px: int = PATCH_PX,
                    stride_px: int | None = None,
                    log: RejectionLog | None = None) -> list[Patch]:
    """Tile a swath into patches, applying the three rejection rules.

    The time window is enforced for the whole swath (it is a property of
    the colocation pair); land fraction and maximum reflectivity are
    evaluated per patch.
    """
    layers = (sigma0_norm, reflectivity, wind, land)
    shapes = {g.values.shape for g in layers}
    if len(shapes) != 1:
        raise ValueError("swath layers must be co-projected")
    if stride_px is None:
        stride_px = patch_px // 2
    log = log if log is not None else RejectionLog()
    incidence_deg = np.asarray(incidence_deg, dtype=np.float64)

    if abs(time_delta_s) > MAX_TIME_DELTA_S:
        log.time_window += 1
        return []

    patches = []
    rows, cols = sigma0_norm.values.shape
    for r in tile_offsets(rows, patch_px, stride_px):
        for c in tile_offsets(cols, patch_px, stride_px):
            def cut(g: Grid) -> Grid:
                return g.with_values(g.values[r:r + patch_px, c:c + patch_px].copy())

            land_tile = cut(land)
            if (land_tile.values == 1).mean() > MAX_LAND_FRACTION:
                log.land += 1
                continue
            refl_tile = cut(reflectivity)
            v = refl_tile.values[refl_tile.valid_mask()]
            if not v.size or v.max() < MIN_MAX_REFLECTIVITY_DBZ:
                log.reflectivity += 1
                continue
            patches.append(Patch(
                cut(sigma0_norm), refl_tile, cut(wind), land_tile,
                incidence_deg[c:c + patch_px],
                swath_id, f"r{r}c{c}", r, c, offset, time_delta_s,
            ))
            log.kept += 1
    return patches


def histogram_wind(wind: Grid) -> np.ndarray:
    v = wind.values[wind.valid_mask()]
    return np.histogram(v, bins=np.asarray(WIND_BIN_EDGES))[0].astype(np.int64)


def histogram_reflectivity(reflectivity: Grid) -> np.ndarray:
    v = reflectivity.values[reflectivity.valid_mask()]
    return np.histogram(v, bins=np.asarray(REFLECTIVITY_BIN_EDGES))[0].astype(np.int64)


@dataclass
class SplitAssignment:
    assignment: dict[str, str]                  # swath_id -> subset
    achieved_fractions: dict[str, np.ndarray]   # subset -> per-bin pixel fraction

    def subset(self, swath_id: str) -> str:
        return self.assignment[swath_id]


def _objective(totals, subset_bins, targets):
    obj = 0.0
    grand = sum(subset_bins.values())
    for name, frac in targets.items():
        bins = subset_bins[name]
        with np.errstate(invalid="ignore"):
            achieved = np.where(grand > 0, bins / np.maximum(grand, 1), 0.0)
        obj += float(np.abs(achieved - frac).sum())
    return obj


def split_balanced(swaths, fractions=(0.8, 0.1, 0.1),
                   seed: int = 0, refine_passes: int = 4) -> SplitAssignment:
    """Assign whole swaths to train/validation/test.

    ``swaths`` is a list of (swath_id, per-bin pixel histogram); the
    histogram concatenates whatever bins should be balanced (reflectivity
    classes, wind bins). Greedy seeding in decreasing-size order, then
    swap refinement, minimizing the L1 distance between each subset's
    per-bin pixel fractions and the subset's target fraction, subject to
    swath counts within +-1 of the target count split.
    """
    if len(swaths) < len(SUBSETS):
        raise ValueError("fewer swaths than subsets")
    fractions = np.asarray(fractions, dtype=np.float64)
    if abs(fractions.sum() - 1.0) > 1e-9:
        raise ValueError("subset fractions must sum to 1")

    ids = [s[0] for s in swaths]
    hists = [np.asarray(s[1], dtype=np.float64) for s in swaths]
    nbins = hists[0].size
    if any(h.size != nbins for h in hists):
        raise ValueError("all histograms must share binning")

    n = len(swaths)
    targets = {name: fractions[k] for k, name in enumerate(SUBSETS)}
    count_target = {name: fractions[k] * n for k, name in enumerate(SUBSETS)}

    order = sorted(range(n), key=lambda i: (-hists[i].sum(), ids[i]))
    assignment: dict[str, str] = {}
    subset_bins = {name: np.zeros(nbins) for name in SUBSETS}
    subset_count = {name: 0 for name in SUBSETS}

    def count_ok(name, delta=1):
        return subset_count[name] + delta <= math.ceil(count_target[name]) + 1

    for i in order:
        best_name, best_obj = None, None
        for name in SUBSETS:
            if not count_ok(name):
                continue
            subset_bins[name] += hists[i]
            obj = _objective(None, subset_bins, targets)
            subset_bins[name] -= hists[i]
            # prefer filling under-count subsets on ties
            key = (obj, subset_count[name] - count_target[name])
            if best_obj is None or key < best_obj:
                best_obj, best_name = key, name
        assignment[ids[i]] = best_name
        subset_bins[best_name] += hists[i]
        subset_count[best_name] += 1

    # refinement: pairwise swaps, then single-swath moves that keep the
    # swath counts within +-1 of target
    lo = {name: math.floor(count_target[name]) - 1 for name in SUBSETS}
    hi = {name: math.ceil(count_target[name]) + 1 for name in SUBSETS}
    for _ in range(refine_passes):
        improved = False
        cur = _objective(None, subset_bins, targets)
        for i in range(n):
            for j in range(i + 1, n):
                a, b = assignment[ids[i]], assignment[ids[j]]
                if a == b:
                    continue
                subset_bins[a] += hists[j] - hists[i]
                subset_bins[b] += hists[i] - hists[j]
                new = _objective(None, subset_bins, targets)
                if new < cur - 1e-12:
                    assignment[ids[i]], assignment[ids[j]] = b, a
                    cur = new
                    improved = True
                else:
                    subset_bins[a] -= hists[j] - hists[i]
                    subset_bins[b] -= hists[i] - hists[j]
        for i in range(n):
            a = assignment[ids[i]]
            for b in SUBSETS:
                if b == a or subset_count[a] - 1 < max(lo[a], 1) \
                        or subset_count[b] + 1 > hi[b]:
                    continue
                subset_bins[a] -= hists[i]
                subset_bins[b] += hists[i]
                new = _objective(None, subset_bins, targets)
                if new < cur - 1e-12:
                    assignment[ids[i]] = b
                    subset_count[a] -= 1
                    subset_count[b] += 1
                    cur = new
                    improved = True
                    a = b
                else:
                    subset_bins[a] += hists[i]
                    subset_bins[b] -= hists[i]
        if not improved:
            break

    grand = sum(subset_bins.values())
    achieved = {}
    for name in SUBSETS:
        with np.errstate(invalid="ignore"):
            achieved[name] = np.where(grand > 0,
                                      subset_bins[name] / np.maximum(grand, 1), 0.0)
    return SplitAssignment(assignment, achieved)


@dataclass(frozen=True)
class OffsetStats:
    r2_distance: float
    r2_direction: float
    r2_wind: float


def _r2(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.std() == 0:
        raise ValueError("degenerate regressor: zero variance")
    if y.std() == 0:
        return 0.0
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(1.0 - (resid**2).sum() / ((y - y.mean()) ** 2).sum())


def registration_stats(offsets, distances_km, winds_mps,
                       bearings_deg=None) -> OffsetStats:
    """OLS R-squared of offset magnitude against station distance and
    wind speed, and of offset direction against the radial bearing
    (when bearings are provided)."""
    if not (len(offsets) == len(distances_km) == len(winds_mps)):
        raise ValueError("input lists must have equal length")
    if len(offsets) < 3:
        raise ValueError("need at least 3 offsets")
    mag = [math.hypot(o.d_row, o.d_col) for o in offsets]
    r2_distance = _r2(distances_km, mag)
    r2_wind = _r2(winds_mps, mag)
    r2_direction = 0.0
    if bearings_deg is not None:
        angles = [math.degrees(math.atan2(o.d_row, o.d_col)) for o in offsets]
        # unwrap each angle to the branch nearest its bearing
        unwrapped = [a + 360.0 * round((b - a) / 360.0)
                     for a, b in zip(angles, bearings_deg)]
        r2_direction = _r2(bearings_deg, unwrapped)
    return OffsetStats(max(r2_distance, 0.0), max(r2_direction, 0.0),
                       max(r2_wind, 0.0))
