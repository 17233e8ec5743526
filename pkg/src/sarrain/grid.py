"""Georeferenced single-band raster grids and the SGRID binary format.

A :class:`Grid` is the core data object shared by every other module:
a row-major 2D array of float32 (or uint8 for masks) with square pixel
spacing, a top-left origin, a timestamp and a nodata sentinel.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

MAGIC = b"SGRD"
VERSION = 1

_DTYPE_CODES = {0: np.float32, 1: np.uint8}
_DTYPE_TO_CODE = {np.dtype(np.float32): 0, np.dtype(np.uint8): 1}

# header: magic, version u32, dtype u8, rows u32, cols u32, spacing f64,
# origin_lat f64, origin_lon f64, timestamp i64, nodata f32
_HEADER = struct.Struct("<4sIBIIdddqf")


class GridFormatError(ValueError):
    """File is not an SGRID file (bad magic)."""


class GridCorruptionError(ValueError):
    """Header is inconsistent with the payload."""


class GridVersionError(ValueError):
    """Unknown format version or dtype code."""


@dataclass(frozen=True)
class GridGeometry:
    """The georeferencing subset of a grid, used to co-project rasters."""

    rows: int
    cols: int
    pixel_spacing_m: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid dimensions must be >= 1")
        if not self.pixel_spacing_m > 0:
            raise ValueError("pixel spacing must be positive")


@dataclass(frozen=True)
class Grid:
    """Georeferenced single-band raster.

    Parameters
    ----------
    values : ndarray
        Row-major 2D array, float32 for data grids or uint8 for masks.
    pixel_spacing_m : float
        Square pixel spacing in meters.
    origin : (lat, lon)
        Top-left corner in degrees.
    timestamp : int
        UTC instant, UNIX seconds.
    nodata : float
        Sentinel for invalid cells.
    """

    values: np.ndarray
    pixel_spacing_m: float
    origin: tuple[float, float] = (0.0, 0.0)
    timestamp: int = 0
    nodata: float = -9999.0

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("grid values must be 2D")
        if v.dtype not in (np.dtype(np.float32), np.dtype(np.uint8)):
            v = v.astype(np.float32)
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("grid dimensions must be >= 1")
        if not self.pixel_spacing_m > 0:
            raise ValueError("pixel spacing must be positive")
        object.__setattr__(self, "values", v)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def geometry(self) -> GridGeometry:
        return GridGeometry(self.rows, self.cols, self.pixel_spacing_m, self.origin)

    def valid_mask(self) -> np.ndarray:
        """Boolean array, True where the cell holds data."""
        return self.values != np.array(self.nodata, dtype=self.values.dtype)

    def is_mask(self) -> bool:
        """True if every cell is 0, 1 or nodata."""
        v = self.values
        sentinel = np.array(self.nodata, dtype=v.dtype)
        return bool(np.all((v == 0) | (v == 1) | (v == sentinel)))

    def with_values(self, values: np.ndarray) -> "Grid":
        return replace(self, values=values)


def write_grid(g: Grid, path) -> None:
    """Write ``g`` to ``path`` in the SGRID binary format (little-endian)."""
    code = _DTYPE_TO_CODE[g.values.dtype]
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        code,
        g.rows,
        g.cols,
        float(g.pixel_spacing_m),
        float(g.origin[0]),
        float(g.origin[1]),
        int(g.timestamp),
        float(g.nodata),
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(g.values).tobytes())


def read_grid(path) -> Grid:
    """Read an SGRID file; round-trips bit-exactly with :func:`write_grid`."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size or raw[:4] != MAGIC:
        raise GridFormatError(f"{path}: not an SGRID file")
    (_, version, code, rows, cols, spacing, lat, lon, ts, nodata) = _HEADER.unpack(
        raw[: _HEADER.size]
    )
    if version != VERSION:
        raise GridVersionError(f"{path}: unsupported version {version}")
    if code not in _DTYPE_CODES:
        raise GridVersionError(f"{path}: unknown dtype code {code}")
    dtype = np.dtype(_DTYPE_CODES[code])
    payload = raw[_HEADER.size:]
    expected = rows * cols * dtype.itemsize
    if len(payload) != expected:
        raise GridCorruptionError(
            f"{path}: header says {rows}x{cols} {dtype} ({expected} bytes), "
            f"payload has {len(payload)}"
        )
    values = np.frombuffer(payload, dtype=dtype).reshape(rows, cols).copy()
    return Grid(values, spacing, (lat, lon), ts, nodata)


def resample(g: Grid, target_spacing_m: float, method: str = "block_mean") -> Grid:
    """Resample to a coarser spacing by an integer factor.

    ``block_mean`` averages the non-nodata cells of each block (all-invalid
    blocks become nodata); ``nearest`` picks each block's top-left cell and
    is the only method valid for masks. Output dims are ceil(dims / factor).
    """
    ratio = target_spacing_m / g.pixel_spacing_m
    factor = int(round(ratio))
    if method == "block_mean" and abs(ratio - factor) > 1e-9:
        raise ValueError(
            f"target spacing {target_spacing_m} is not an integer multiple "
            f"of {g.pixel_spacing_m}"
        )
    if factor < 1:
        raise ValueError("target spacing must be >= source spacing")
    if factor == 1:
        return g

    if method == "nearest":
        out = g.values[::factor, ::factor].copy()
    elif method == "block_mean":
        rows_out = -(-g.rows // factor)
        cols_out = -(-g.cols // factor)
        v = g.values.astype(np.float64)
        valid = g.valid_mask()
        pad = ((0, rows_out * factor - g.rows), (0, cols_out * factor - g.cols))
        v = np.pad(np.where(valid, v, 0.0), pad)
        w = np.pad(valid.astype(np.float64), pad)
        v = v.reshape(rows_out, factor, cols_out, factor).sum(axis=(1, 3))
        w = w.reshape(rows_out, factor, cols_out, factor).sum(axis=(1, 3))
        with np.errstate(invalid="ignore"):
            out = np.where(w > 0, v / np.maximum(w, 1), g.nodata)
        out = out.astype(np.float32)
    else:
        raise ValueError(f"unknown resampling method {method!r}")

    return Grid(out, target_spacing_m, g.origin, g.timestamp, g.nodata)


def tile_offsets(length: int, tile_px: int, stride_px: int) -> list[int]:
    """Offsets along one axis; the last tile is clamped flush to the edge."""
    offsets = list(range(0, length - tile_px + 1, stride_px))
    if offsets[-1] != length - tile_px:
        offsets.append(length - tile_px)
    return offsets


def tile(g: Grid, tile_px: int, stride_px: int | None = None):
    """Cut ``g`` into tile_px x tile_px tiles advancing by stride_px.

    Returns a list of ``(row_offset, col_offset, Grid)``. Default stride is
    half the tile width, so every interior pixel lands in exactly 4 tiles.
    """
    if stride_px is None:
        stride_px = tile_px // 2
    if tile_px > min(g.rows, g.cols):
        raise ValueError(f"tile {tile_px} larger than grid {g.rows}x{g.cols}")
    if tile_px < 1 or stride_px < 1:
        raise ValueError("tile and stride must be positive")
    out = []
    for r in tile_offsets(g.rows, tile_px, stride_px):
        for c in tile_offsets(g.cols, tile_px, stride_px):
            sub = g.values[r : r + tile_px, c : c + tile_px].copy()
            out.append((r, c, g.with_values(sub)))
    return out


def distance_to_coast(land_mask: Grid, cap_km: float = 100.0) -> Grid:
    """Per-pixel Euclidean distance in km to the nearest land pixel.

    Land pixels get 0; a grid with no land at all gets ``cap_km`` everywhere.
    Uses the exact Euclidean distance transform.
    """
    if not land_mask.is_mask():
        raise ValueError("distance_to_coast requires a {0,1} land mask")
    land = land_mask.values == 1
    if not land.any():
        dist = np.full(land.shape, cap_km, dtype=np.float32)
    else:
        dist_px = ndimage.distance_transform_edt(~land)
        dist = np.minimum(dist_px * land_mask.pixel_spacing_m / 1000.0, cap_km)
        dist = dist.astype(np.float32)
    return Grid(dist, land_mask.pixel_spacing_m, land_mask.origin,
                land_mask.timestamp, land_mask.nodata)
