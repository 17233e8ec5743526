"""The Koch filter bank: binary detector and differentiable reformulation.

Four high-pass filters (identity minus box mean at growing window sizes)
respond to heterogeneous ocean roughness. Each response is scaled by a
per-class gain and bias; responses are squashed and fused across filters
by a quadratic mean. The original detector clips the scaled response to
[0, 1]; the trainable variant replaces the clip with a sigmoid centered
at 0.5 with unit slope there, which keeps gradients alive everywhere.

24 trainable parameters total: gain K[i][j] and bias B[i][j] for class
i in {>=1, >=3, >=10 mm/h} and filter j in {1..4}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .grid import Grid

DEFAULT_SCALES = (2, 4, 8, 16)

SIGMOID_STEEPNESS = 4.0
SIGMOID_CENTER = 0.5

N_CLASSES = 3
N_FILTERS = 4


@dataclass(frozen=True)
class FilterBankSpec:
    """Four high-pass filters, each identity-minus-box-mean at one scale."""

    scales: tuple[int, ...] = DEFAULT_SCALES

    def __post_init__(self):
        if len(self.scales) != N_FILTERS:
            raise ValueError("filter bank takes exactly 4 window scales")
        if any(s < 2 for s in self.scales):
            raise ValueError("window scales must be >= 2")

    def kernel(self, j: int) -> np.ndarray:
        """Explicit kernel of filter j (zero-DC by construction)."""
        w = self.scales[j]
        k = np.full((w, w), -1.0 / (w * w))
        k[(w - 1) // 2, (w - 1) // 2] += 1.0
        return k


@dataclass(frozen=True)
class KochParams:
    """Gains K[i][j] and biases B[i][j], plus the fixed sigmoid shape."""

    K: np.ndarray
    B: np.ndarray
    a: float = SIGMOID_STEEPNESS
    c: float = SIGMOID_CENTER

    def __post_init__(self):
        K = np.asarray(self.K, dtype=np.float64)
        B = np.asarray(self.B, dtype=np.float64)
        if K.shape != (N_CLASSES, N_FILTERS) or B.shape != (N_CLASSES, N_FILTERS):
            raise ValueError("K and B must be 3x4")
        if not self.a > 0:
            raise ValueError("sigmoid steepness must be positive")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "B", B)

    @classmethod
    def initial(cls, gain: float = 0.5, bias: float = 0.5) -> "KochParams":
        """The untrained starting point shared by both model variants."""
        return cls(np.full((N_CLASSES, N_FILTERS), gain),
                   np.full((N_CLASSES, N_FILTERS), bias))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.K.ravel(), self.B.ravel()])

    @classmethod
    def from_flat(cls, v: np.ndarray, a: float = SIGMOID_STEEPNESS,
                  c: float = SIGMOID_CENTER) -> "KochParams":
        v = np.asarray(v, dtype=np.float64)
        n = N_CLASSES * N_FILTERS
        return cls(v[:n].reshape(N_CLASSES, N_FILTERS),
                   v[n:].reshape(N_CLASSES, N_FILTERS), a, c)

    def to_json(self, scales=DEFAULT_SCALES, resolution_m=400) -> str:
        return json.dumps({
            "a": self.a, "c": self.c,
            "K": self.K.tolist(), "B": self.B.tolist(),
            "scales": list(scales), "resolution_m": resolution_m,
        })

    @classmethod
    def from_json(cls, text: str):
        d = json.loads(text)
        params = cls(np.array(d["K"]), np.array(d["B"]), d["a"], d["c"])
        return params, FilterBankSpec(tuple(d["scales"])), d.get("resolution_m")


@dataclass(frozen=True)
class Prediction:
    """Per-class soft masks in [0, 1], channel order >=1 / >=3 / >=10 mm/h."""

    channels: np.ndarray  # (3, rows, cols)

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.float64)
        if ch.ndim != 3 or ch.shape[0] != N_CLASSES:
            raise ValueError("prediction needs 3 channels")
        object.__setattr__(self, "channels", ch)


def highpass_bank(values: np.ndarray, spec: FilterBankSpec) -> np.ndarray:
    """Apply the four high-pass filters; returns (4, rows, cols).

    Borders use mirror padding, so a constant input maps to exactly zero
    and adding a constant offset leaves the responses unchanged.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError("expected a 2D array")
    if min(v.shape) < max(spec.scales):
        raise ValueError(
            f"grid {v.shape} smaller than largest filter window {max(spec.scales)}"
        )
    # Removing the mean first costs nothing (the kernels are zero-DC) and
    # makes DC invariance bit-exact despite running-sum rounding.
    v = v - v.mean()
    out = np.empty((N_FILTERS,) + v.shape)
    for j, w in enumerate(spec.scales):
        out[j] = v - ndimage.uniform_filter(v, size=w, mode="reflect")
    return out


def sigmoid(x, a: float = SIGMOID_STEEPNESS, c: float = SIGMOID_CENTER):
    """1 / (1 + exp(-a (x - c))): 0.5 at the center, slope a/4 there."""
    with np.errstate(over="ignore"):  # exp overflow saturates to exactly 0
        return 1.0 / (1.0 + np.exp(-a * (np.asarray(x, dtype=np.float64) - c)))


def _grid_values(g) -> np.ndarray:
    return g.values if isinstance(g, Grid) else np.asarray(g)


def koch_forward(g, p: KochParams, spec: FilterBankSpec = FilterBankSpec(),
                 bank: np.ndarray | None = None) -> Prediction:
    """Differentiable forward pass.

    y_i = sqrt(mean_j sigmoid(K[i][j] * P_j + B[i][j])^2), bounded in (0, 1).
    Pass a precomputed ``bank`` to amortize filtering across calls.
    """
    if bank is None:
        bank = highpass_bank(_grid_values(g), spec)
    z = p.K[:, :, None, None] * bank[None] + p.B[:, :, None, None]
    s = sigmoid(z, p.a, p.c)
    y = np.sqrt((s**2).mean(axis=1))
    return Prediction(y)


def koch_backward(g, p: KochParams, grad_y: np.ndarray,
                  spec: FilterBankSpec = FilterBankSpec(),
                  bank: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of a scalar loss w.r.t. K and B.

    ``grad_y`` is dL/dy with shape (3, rows, cols). Returns (dK, dB),
    each 3x4, summed over pixels.
    """
    if bank is None:
        bank = highpass_bank(_grid_values(g), spec)
    grad_y = np.asarray(grad_y, dtype=np.float64)
    z = p.K[:, :, None, None] * bank[None] + p.B[:, :, None, None]
    s = sigmoid(z, p.a, p.c)
    y = np.sqrt((s**2).mean(axis=1))
    # dy/ds_ij = s_ij / (n_filters * y_i); y > 0 always since sigma > 0
    ds = grad_y[:, None] * s / (N_FILTERS * y[:, None])
    dz = ds * p.a * s * (1.0 - s)
    dK = (dz * bank[None]).sum(axis=(2, 3))
    dB = dz.sum(axis=(2, 3))
    return dK, dB


def koch_clipped(g, p: KochParams, spec: FilterBankSpec = FilterBankSpec(),
                 bank: np.ndarray | None = None) -> Prediction:
    """The original construction: hard clip instead of sigmoid, then RMS."""
    if bank is None:
        bank = highpass_bank(_grid_values(g), spec)
    z = p.K[:, :, None, None] * bank[None] + p.B[:, :, None, None]
    s = np.clip(z, 0.0, 1.0)
    return Prediction(np.sqrt((s**2).mean(axis=1)))


def koch_binary(g, spec: FilterBankSpec, koch_init: KochParams,
                threshold: float) -> Grid | np.ndarray:
    """Binary rain detector: clipped RMS of the first-class row >= threshold."""
    if not 0 <= threshold < 1:
        raise ValueError("threshold must lie in [0, 1)")
    rms = koch_clipped(g, koch_init, spec).channels[0]
    mask = (rms >= threshold).astype(np.uint8)
    if isinstance(g, Grid):
        return Grid(mask, g.pixel_spacing_m, g.origin, g.timestamp, 255.0)
    return mask
