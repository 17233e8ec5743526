"""Reduced-stage encoder-decoder segmentation network.

Three pooling stages (one fewer than the classic design) keep the
theoretical receptive field at 140 px, small enough that overlapping
tiles can be mosaicked without seams. The channel ladder is pinned by a
hard assertion on the total trainable parameter count.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

# channel widths per encoder stage plus bottleneck; together with the
# conv counts below these yield exactly EXPECTED_PARAMS weights
WIDTHS = (40, 72, 136, 272)
ENCODER_CONVS = 3
BOTTLENECK_CONVS = 3
DECODER_CONVS = 2
N_STAGES = 3
OUT_CHANNELS = 3

EXPECTED_PARAMS = 3_117_731
RECEPTIVE_FIELD_PX = 140


@dataclass(frozen=True)
class UNetConfig:
    learning_rate: float = 1e-5
    epochs: int = 500
    batch_size: int = 32
    seed: int = 0
    resolution_m: int = 400

    def __post_init__(self):
        if self.resolution_m == 100 and self.batch_size != 16:
            raise ValueError("batch size must be 16 at 100 m/px")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning rate must be >= 0")


def _block(in_ch: int, out_ch: int, n_convs: int) -> nn.Sequential:
    layers = []
    for k in range(n_convs):
        layers.append(nn.Conv2d(in_ch if k == 0 else out_ch, out_ch, 3,
                                padding=1))
        layers.append(nn.ReLU(inplace=True))
    return nn.Sequential(*layers)


class RainUNet(nn.Module):
    def __init__(self):
        super().__init__()
        w1, w2, w3, wb = WIDTHS
        self.enc1 = _block(1, w1, ENCODER_CONVS)
        self.enc2 = _block(w1, w2, ENCODER_CONVS)
        self.enc3 = _block(w2, w3, ENCODER_CONVS)
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = _block(w3, wb, BOTTLENECK_CONVS)
        self.up3 = nn.ConvTranspose2d(wb, w3, 2, stride=2)
        self.dec3 = _block(2 * w3, w3, DECODER_CONVS)
        self.up2 = nn.ConvTranspose2d(w3, w2, 2, stride=2)
        self.dec2 = _block(2 * w2, w2, DECODER_CONVS)
        self.up1 = nn.ConvTranspose2d(w2, w1, 2, stride=2)
        self.dec1 = _block(2 * w1, w1, DECODER_CONVS)
        self.head = nn.Conv2d(w1, OUT_CHANNELS, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        e1 = self.enc1(x)
        e2 = self.enc2(self.pool(e1))
        e3 = self.enc3(self.pool(e2))
        b = self.bottleneck(self.pool(e3))
        d3 = self.dec3(torch.cat([self.up3(b), e3], dim=1))
        d2 = self.dec2(torch.cat([self.up2(d3), e2], dim=1))
        d1 = self.dec1(torch.cat([self.up1(d2), e1], dim=1))
        return torch.sigmoid(self.head(d1))


def count_params(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters() if p.requires_grad)


def receptive_field() -> int:
    """Theoretical receptive-field width, accumulated layer by layer.

    Each 3x3 conv widens the field by 2 * jump; each 2x2 pool adds one
    jump and doubles it; each 2x2 transposed conv is charged one
    coarse-grid step before the jump halves (the standard calculator
    convention). The strict input support is a few pixels narrower, so
    this is a safe bound for choosing mosaic margins.
    """
    rf, jump = 1, 1
    for _ in range(N_STAGES):
        rf += 2 * jump * ENCODER_CONVS
        rf += jump          # 2x2 max pool
        jump *= 2
    rf += 2 * jump * BOTTLENECK_CONVS
    for _ in range(N_STAGES):
        rf += jump          # 2x2 transposed conv, coarse-grid step
        jump //= 2
        rf += 2 * jump * DECODER_CONVS
    return rf


def build_model(cfg: UNetConfig | None = None) -> RainUNet:
    """Construct the network; the parameter count is a hard contract."""
    if cfg is not None:
        torch.manual_seed(cfg.seed)
    model = RainUNet()
    n = count_params(model)
    if n != EXPECTED_PARAMS:
        raise AssertionError(
            f"parameter count {n} != expected {EXPECTED_PARAMS}")
    return model
