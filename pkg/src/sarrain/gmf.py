"""Geophysical model functions and incidence-angle normalization.

Ocean backscatter falls off strongly with incidence angle. Dividing each
column of a swath by the GMF prediction at a fixed reference wind
(10 m/s, 45 degrees from azimuth) flattens that dependence, which is the
only preprocessing applied to sigma0 before segmentation. Coefficients
are loaded from a plain text file so that stub GMFs can be swapped in
for testing.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .grid import Grid

REFERENCE_WIND_MPS = 10.0
REFERENCE_DIRECTION_DEG = 45.0

INCIDENCE_MIN_DEG = 16.0
INCIDENCE_MAX_DEG = 66.0

_ARITY = {"cmod5n": 28}


class GmfRangeError(ValueError):
    """Incidence angle outside the GMF's validity range."""


@dataclass(frozen=True)
class GmfSpec:
    """A named GMF with its coefficient table and reference geometry."""

    name: str
    coefficients: tuple[float, ...]
    reference_wind_mps: float = REFERENCE_WIND_MPS
    reference_direction_deg: float = REFERENCE_DIRECTION_DEG

    def __post_init__(self):
        expected = _ARITY.get(self.name)
        if expected is not None and len(self.coefficients) != expected:
            raise ValueError(
                f"{self.name} takes {expected} coefficients, "
                f"got {len(self.coefficients)}"
            )


def load_gmf(path=None, name: str = "cmod5n") -> GmfSpec:
    """Load a coefficient file (one real per line, '#' comments).

    With no path, loads the bundled CMOD5.N table.
    """
    if path is None:
        text = resources.files("sarrain.data").joinpath("cmod5n.txt").read_text()
    else:
        with open(path) as f:
            text = f.read()
    coeffs = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            coeffs.append(float(line))
    return GmfSpec(name, tuple(coeffs))


def _cmod5n(c, incidence_deg, wind_mps, direction_deg):
    """CMOD5.N forward model: linear-power VV backscatter over ocean."""
    theta = np.asarray(incidence_deg, dtype=np.float64)
    v = np.asarray(wind_mps, dtype=np.float64)
    phi = np.asarray(direction_deg, dtype=np.float64)

    thetm, thethr, zpow = 40.0, 25.0, 1.6
    x = (theta - thetm) / thethr

    a0 = c[0] + c[1] * x + c[2] * x**2 + c[3] * x**3
    a1 = c[4] + c[5] * x
    a2 = c[6] + c[7] * x
    gam = c[8] + c[9] * x + c[10] * x**2
    s0 = c[11] + c[12] * x

    s = a2 * v
    a3 = 1.0 / (1.0 + np.exp(-np.maximum(s, s0)))
    low = s < s0
    with np.errstate(invalid="ignore", divide="ignore"):
        a3 = np.where(low, a3 * (s / s0) ** (s0 * (1.0 - a3)), a3)
    b0 = (a3**gam) * 10.0 ** (a0 + a1 * v)

    b1 = c[14] * v * (0.5 + x - np.tanh(4.0 * (x + c[15] + c[16] * v)))
    b1 = (c[13] * (1.0 + x) - b1) / (np.exp(0.34 * (v - c[17])) + 1.0)

    y0, pn = c[18], c[19]
    a = y0 - (y0 - 1.0) / pn
    b = 1.0 / (pn * (y0 - 1.0) ** (pn - 1.0))
    v0 = c[20] + c[21] * x + c[22] * x**2
    d1 = c[23] + c[24] * x + c[25] * x**2
    d2 = c[26] + c[27] * x

    v2 = v / v0 + 1.0
    v2 = np.where(v2 < y0, a + b * (v2 - 1.0) ** pn, v2)
    b2 = (-d1 + d2 * v2) * np.exp(-v2)

    phir = np.deg2rad(phi)
    return b0 * (1.0 + b1 * np.cos(phir) + b2 * np.cos(2.0 * phir)) ** zpow


def gmf_eval(spec: GmfSpec, incidence_deg, wind_mps, direction_deg):
    """Evaluate the GMF; returns linear-power backscatter, strictly positive.

    Scalar in, scalar out; array in, array out.
    """
    inc = np.asarray(incidence_deg, dtype=np.float64)
    if np.any(inc < INCIDENCE_MIN_DEG) or np.any(inc > INCIDENCE_MAX_DEG):
        raise GmfRangeError(
            f"incidence outside [{INCIDENCE_MIN_DEG}, {INCIDENCE_MAX_DEG}] deg"
        )
    if np.any(np.asarray(wind_mps) < 0):
        raise ValueError("wind speed must be >= 0")
    if spec.name != "cmod5n":
        raise ValueError(f"unknown GMF {spec.name!r}")
    out = _cmod5n(spec.coefficients, inc, wind_mps, direction_deg)
    if np.ndim(incidence_deg) == 0 and np.ndim(wind_mps) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Sigma0Grid:
    """Linear-power backscatter grid plus per-column incidence angles."""

    grid: Grid
    incidence_deg: np.ndarray

    def __post_init__(self):
        inc = np.asarray(self.incidence_deg, dtype=np.float64)
        if inc.shape != (self.grid.cols,):
            raise ValueError("need one incidence angle per column")
        object.__setattr__(self, "incidence_deg", inc)


def incidence_normalize(s: Sigma0Grid, spec: GmfSpec, gmf=None) -> Grid:
    """Divide each column by the GMF value at the reference wind/direction.

    ``gmf`` overrides the evaluation function (for stub GMFs in tests);
    it takes (incidence_deg, wind_mps, direction_deg) arrays. Nodata
    propagates unchanged.
    """
    if gmf is None:
        def gmf(inc, w, d):
            return gmf_eval(spec, inc, w, d)
    try:
        ref = np.asarray(
            gmf(s.incidence_deg, spec.reference_wind_mps,
                spec.reference_direction_deg),
            dtype=np.float64,
        )
    except GmfRangeError as e:
        bad = np.where(
            (s.incidence_deg < INCIDENCE_MIN_DEG)
            | (s.incidence_deg > INCIDENCE_MAX_DEG)
        )[0]
        col = int(bad[0]) if bad.size else -1
        raise GmfRangeError(f"column {col}: {e}") from e
    g = s.grid
    valid = g.valid_mask()
    out = np.where(valid, g.values / ref[np.newaxis, :], g.nodata)
    return g.with_values(out.astype(np.float32))
