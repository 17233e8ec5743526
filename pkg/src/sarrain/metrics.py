"""Confusion matrices, macro F1 scores and stratified performance curves.

Recall is the mean diagonal of the row-normalized confusion matrix,
precision the mean diagonal of the column-normalized one, and F1 their
harmonic mean. Empty rows or columns contribute 0 to the means. On a
2x2 matrix this is the "binary F1"; on 4x4 (rain-free plus three rain
classes) the "multiclass F1".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .koch import Prediction


class UndefinedMetricError(ValueError):
    """Metric requested on an empty (all-zero) confusion matrix."""


@dataclass
class ConfusionMatrix:
    """n x n integer counts; rows are truth, columns are prediction."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("confusion matrix must be square")
        if (c < 0).any():
            raise ValueError("confusion counts must be non-negative")
        self.counts = c

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "ConfusionMatrix":
        return cls(np.zeros((n, n), dtype=np.int64))

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        """Element-wise sum; accumulation over tiles equals a single pass."""
        if other.n != self.n:
            raise ValueError("cannot merge matrices of different size")
        return ConfusionMatrix(self.counts + other.counts)


def _values(g) -> np.ndarray:
    return g.values if isinstance(g, Grid) else np.asarray(g)


def labels_from_channels(pred, cut: float = 0.5) -> np.ndarray:
    """Per-pixel class label: the largest class whose channel exceeds cut.

    Channels need not be monotone; the highest qualifying index wins.
    Label 0 means rain-free.
    """
    ch = pred.channels if isinstance(pred, Prediction) else np.asarray(pred)
    labels = np.zeros(ch.shape[1:], dtype=np.int64)
    for i in range(ch.shape[0]):
        labels[ch[i] > cut] = i + 1
    return labels


def confusion(pred_labels, true_labels, n: int, valid=None) -> ConfusionMatrix:
    """Count (truth, prediction) pairs over valid pixels."""
    p = _values(pred_labels).astype(np.int64)
    t = _values(true_labels).astype(np.int64)
    if p.shape != t.shape:
        raise ValueError("label grids must share geometry")
    if valid is not None:
        v = _values(valid).astype(bool)
        p, t = p[v], t[v]
    else:
        p, t = p.ravel(), t.ravel()
    if p.size and (p.max() >= n or t.max() >= n or p.min() < 0 or t.min() < 0):
        raise ValueError(f"labels out of range for {n} classes")
    counts = np.bincount(t * n + p, minlength=n * n).reshape(n, n)
    return ConfusionMatrix(counts)


def recall_precision(cm: ConfusionMatrix) -> tuple[float, float]:
    c = cm.counts.astype(np.float64)
    if c.sum() == 0:
        raise UndefinedMetricError("all-zero confusion matrix")
    row = c.sum(axis=1)
    col = c.sum(axis=0)
    diag = np.diag(c)
    # empty rows/columns contribute 0 to the macro mean
    rec = float(np.where(row > 0, diag / np.maximum(row, 1), 0.0).mean())
    prec = float(np.where(col > 0, diag / np.maximum(col, 1), 0.0).mean())
    return rec, prec


def macro_f1(cm: ConfusionMatrix) -> float:
    """Harmonic mean of macro recall and macro precision."""
    rec, prec = recall_precision(cm)
    if rec + prec == 0:
        return 0.0
    return 2.0 * prec * rec / (prec + rec)


def binary_f1(pred_mask, true_mask, valid=None) -> float:
    """Macro F1 of the 2x2 confusion matrix induced by two binary masks."""
    return macro_f1(confusion(pred_mask, true_mask, 2, valid))


def detection_probability(pred_mask, true_mask, valid=None) -> float:
    """Fraction of truth-positive pixels predicted positive."""
    cm = confusion(pred_mask, true_mask, 2, valid).counts
    positives = cm[1].sum()
    if positives == 0:
        raise UndefinedMetricError("no positive truth pixels")
    return float(cm[1, 1] / positives)


@dataclass
class StratifiedCurve:
    """Per-bin metric over a stratification variable (wind, incidence...).

    Bins with no valid pixels are absent: their value is NaN and their
    count 0, never a spurious 0 score.
    """

    edges: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    metric: str = "binary_f1"


def stratified(pred_mask, true_mask, strat, edges,
               valid=None, metric: str = "binary_f1") -> StratifiedCurve:
    """Binary F1 (or detection probability) per stratification bin."""
    edges = np.asarray(edges, dtype=np.float64)
    if not np.all(np.diff(edges) > 0):
        raise ValueError("bin edges must be strictly increasing")
    p = _values(pred_mask)
    t = _values(true_mask)
    s = _values(strat)
    base = np.ones(s.shape, dtype=bool) if valid is None else _values(valid).astype(bool)

    fns = {"binary_f1": binary_f1, "detection": detection_probability}
    fn = fns[metric]
    nbins = len(edges) - 1
    values = np.full(nbins, np.nan)
    counts = np.zeros(nbins, dtype=np.int64)
    for k in range(nbins):
        sel = base & (s >= edges[k]) & (s < edges[k + 1])
        counts[k] = int(sel.sum())
        if counts[k] == 0:
            continue
        try:
            values[k] = fn(p, t, sel)
        except UndefinedMetricError:
            counts[k] = 0
    return StratifiedCurve(edges, values, counts, metric)
