"""Constant-translation registration of radar truth onto SAR geometry.

The weather-radar raster can be displaced by a constant offset relative
to the rain signature in the SAR image (advection between scan times,
gridding error). ``register`` finds that integer-pixel offset by
maximizing normalized cross-correlation; ``apply_offset`` removes it.

Sign convention: the returned (d_row, d_col) is the displacement of the
radar raster relative to the SAR feature, so ``apply_offset(radar, off)``
aligns the radar raster with the SAR image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid


class NoSignalError(ValueError):
    """Zero-variance input; cross-correlation is undefined."""


@dataclass(frozen=True)
class RegistrationOffset:
    d_row: int
    d_col: int
    score: float


def _translate(values: np.ndarray, d_row: int, d_col: int, fill) -> np.ndarray:
    """Shift content by (+d_row, +d_col); exposed cells get ``fill``."""
    out = np.full_like(values, fill)
    rows, cols = values.shape
    src_r = slice(max(0, -d_row), min(rows, rows - d_row))
    src_c = slice(max(0, -d_col), min(cols, cols - d_col))
    dst_r = slice(max(0, d_row), min(rows, rows + d_row))
    dst_c = slice(max(0, d_col), min(cols, cols + d_col))
    out[dst_r, dst_c] = values[src_r, src_c]
    return out


def register(sar_feature: Grid, radar_mask: Grid,
             search_radius_px: int = 32) -> RegistrationOffset:
    """Find the integer translation of ``radar_mask`` against ``sar_feature``.

    Maximizes the Pearson correlation between the interior of the SAR
    feature map (a heterogeneity response, typically) and the radar mask
    over all shifts within the search radius. Ties go to the smallest
    |d_row| + |d_col|, then smallest d_row, then d_col.
    """
    if sar_feature.values.shape != radar_mask.values.shape:
        raise ValueError("register requires identical geometry")
    if search_radius_px < 0:
        raise ValueError("search radius must be >= 0")
    r = search_radius_px
    feat = sar_feature.values.astype(np.float64)
    mask = radar_mask.values.astype(np.float64)
    rows, cols = feat.shape
    if 2 * r >= min(rows, cols):
        raise ValueError("search radius too large for grid")

    template = feat[r : rows - r, r : cols - r]
    template = template - template.mean()
    tnorm = np.sqrt((template**2).sum())
    if tnorm == 0:
        raise NoSignalError("SAR feature has zero variance in the search interior")
    if mask.std() == 0:
        raise NoSignalError("radar mask has zero variance")

    h, w = template.shape
    best = []
    for dr in range(-r, r + 1):
        for dc in range(-r, r + 1):
            win = mask[r + dr : r + dr + h, r + dc : r + dc + w]
            win = win - win.mean()
            wnorm = np.sqrt((win**2).sum())
            score = 0.0 if wnorm == 0 else float((template * win).sum() / (tnorm * wnorm))
            best.append((score, dr, dc))
    top = max(s for s, _, _ in best)
    ties = [(dr, dc) for s, dr, dc in best if top - s <= 1e-12]
    dr, dc = min(ties, key=lambda t: (abs(t[0]) + abs(t[1]), t[0], t[1]))
    return RegistrationOffset(dr, dc, top)


def apply_offset(g: Grid, off: RegistrationOffset) -> Grid:
    """Undo the registered displacement; exposed cells become nodata."""
    if abs(off.d_row) > g.rows or abs(off.d_col) > g.cols:
        raise ValueError("offset exceeds grid dimensions")
    fill = np.array(g.nodata, dtype=g.values.dtype)
    out = _translate(g.values, -off.d_row, -off.d_col, fill)
    return g.with_values(out)


def negate(off: RegistrationOffset) -> RegistrationOffset:
    return RegistrationOffset(-off.d_row, -off.d_col, off.score)


def load_overrides(path) -> dict[tuple[str, str], tuple[int, int]]:
    """Manual-override CSV 'swath,patch,d_row,d_col' -> offset lookup."""
    import csv

    out = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out[(row["swath"], row["patch"])] = (int(row["d_row"]), int(row["d_col"]))
    return out
