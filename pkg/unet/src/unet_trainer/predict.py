"""Seamless tiled inference over whole swaths.

Tiles are predicted independently and only each tile's interior is kept:
the discarded outer margin is at least half the theoretical receptive
field, so the retained pixels are unaffected by tile-border padding and
adjacent interiors abut without seams. The tile stride must stay a
multiple of the total pooling factor so every tile shares the same
pooling phase — otherwise translation invariance (and hence seam
continuity) is lost.
"""

from __future__ import annotations

import numpy as np
import torch

from sarrain.grid import Grid

from .model import RECEPTIVE_FIELD_PX, RainUNet

POOLING_FACTOR = 8
MIN_MARGIN_PX = RECEPTIVE_FIELD_PX // 2  # 70


def _offsets(length: int, tile: int, stride: int) -> list[int]:
    if length <= tile:
        return [0]
    out = list(range(0, length - tile, stride))
    out.append(length - tile)
    return out


def _predict(model: RainUNet, values: np.ndarray) -> np.ndarray:
    with torch.no_grad():
        x = torch.from_numpy(values.astype(np.float32))[None, None]
        return model(x)[0].numpy()


def predict_mosaic(model: RainUNet, grid: Grid, tile_px: int = 256,
                   margin_px: int = 72) -> np.ndarray:
    """Predict a whole swath; returns a (3, rows, cols) channel stack."""
    if margin_px < MIN_MARGIN_PX:
        raise ValueError(
            f"margin must be >= {MIN_MARGIN_PX} px (half the receptive "
            f"field), got {margin_px}")
    stride = tile_px - 2 * margin_px
    if stride <= 0:
        raise ValueError("margins leave no retained interior")
    if stride % POOLING_FACTOR:
        raise ValueError(
            f"tile stride {stride} must be a multiple of {POOLING_FACTOR} "
            "to preserve pooling alignment between tiles")
    rows, cols = grid.values.shape
    if rows % POOLING_FACTOR or cols % POOLING_FACTOR:
        raise ValueError(
            f"swath dimensions must be multiples of {POOLING_FACTOR}")
    model.eval()

    if rows <= tile_px and cols <= tile_px:
        return _predict(model, grid.values)

    out = np.zeros((3, rows, cols), dtype=np.float32)
    row_offs = _offsets(rows, tile_px, stride)
    col_offs = _offsets(cols, tile_px, stride)
    for r in row_offs:
        for c in col_offs:
            pred = _predict(model, grid.values[r:r + tile_px, c:c + tile_px])
            # retained interior; edge tiles keep their outer margin so
            # the mosaic covers the full swath
            r0 = 0 if r == 0 else margin_px
            r1 = tile_px if r == row_offs[-1] else tile_px - margin_px
            c0 = 0 if c == 0 else margin_px
            c1 = tile_px if c == col_offs[-1] else tile_px - margin_px
            out[:, r + r0:r + r1, c + c0:c + c1] = pred[:, r0:r1, c0:c1]
    return out
