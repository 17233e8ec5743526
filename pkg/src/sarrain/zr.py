"""Z-R reflectivity / rain-rate conversions and nested class masks.

Z = a * R**b with Z in linear mm^6/m^3 and R in mm/h. The default
convective coefficients a=300, b=1.4 put the 1 / 3 / 10 mm/h rain-rate
thresholds at 24.77 / 31.45 / 38.77 dBZ, matching the rounded class
bounds 24.7 / 31.5 / 38.8 used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid

THRESHOLDS_DBZ = (24.7, 31.5, 38.8)
THRESHOLDS_MMH = (1.0, 3.0, 10.0)

NO_RAIN_DBZ = -np.inf


@dataclass(frozen=True)
class ZrParams:
    a: float = 300.0
    b: float = 1.4

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("Z-R coefficients must be positive")


def dbz_from_rainrate(r_mmh, zr: ZrParams = ZrParams()):
    """Rain rate (mm/h) to reflectivity (dBZ); r=0 maps to -inf (rain-free)."""
    r = np.asarray(r_mmh, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("rain rate must be >= 0")
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(zr.a * r**zr.b)
    return float(out) if np.ndim(r_mmh) == 0 else out


def rainrate_from_dbz(z_dbz, zr: ZrParams = ZrParams()):
    """Exact inverse of :func:`dbz_from_rainrate`."""
    z = np.asarray(z_dbz, dtype=np.float64)
    out = (10.0 ** (z / 10.0) / zr.a) ** (1.0 / zr.b)
    return float(out) if np.ndim(z_dbz) == 0 else out


@dataclass(frozen=True)
class ClassMasks:
    """Nested binary masks for rain rate >= 1, 3, 10 mm/h.

    ``valid`` marks pixels where the source reflectivity held data;
    nodata pixels are 0 in all three masks.
    """

    m1: Grid
    m3: Grid
    m10: Grid
    valid: Grid
    thresholds_dbz: tuple[float, float, float] = THRESHOLDS_DBZ

    def __post_init__(self):
        shapes = {g.values.shape for g in (self.m1, self.m3, self.m10, self.valid)}
        if len(shapes) != 1:
            raise ValueError("class masks must share geometry")
        if not (np.all(self.m10.values <= self.m3.values)
                and np.all(self.m3.values <= self.m1.values)):
            raise ValueError("class masks must nest: m10 <= m3 <= m1")

    def channels(self) -> np.ndarray:
        """(3, rows, cols) float array, channel order 1 / 3 / 10 mm/h."""
        return np.stack(
            [g.values.astype(np.float64) for g in (self.m1, self.m3, self.m10)]
        )

    def labels(self) -> np.ndarray:
        """4-interval class labels 0..3 (0 = rain-free)."""
        return (self.m1.values.astype(np.int64)
                + self.m3.values + self.m10.values)


def class_masks(reflectivity: Grid,
                thresholds_dbz=THRESHOLDS_DBZ) -> ClassMasks:
    """Threshold a reflectivity grid into the three nested masks."""
    t1, t3, t10 = thresholds_dbz
    if not (t1 < t3 < t10):
        raise ValueError("thresholds must be strictly increasing")
    valid = reflectivity.valid_mask()
    z = reflectivity.values

    def mask(t):
        m = ((z >= t) & valid).astype(np.uint8)
        return Grid(m, reflectivity.pixel_spacing_m, reflectivity.origin,
                    reflectivity.timestamp, 255.0)

    vgrid = Grid(valid.astype(np.uint8), reflectivity.pixel_spacing_m,
                 reflectivity.origin, reflectivity.timestamp, 255.0)
    return ClassMasks(mask(t1), mask(t3), mask(t10), vgrid, tuple(thresholds_dbz))
