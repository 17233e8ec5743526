"""Shared grid constructors for the test suite."""

import numpy as np

from sarrain.grid import Grid


def make_grid(values, spacing=400.0, nodata=-9999.0):
    return Grid(np.asarray(values, dtype=np.float32), spacing, nodata=nodata)


def make_mask(values, spacing=400.0):
    return Grid(np.asarray(values, dtype=np.uint8), spacing, nodata=255.0)
