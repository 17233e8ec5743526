"""
Confusion matrices, macro F1 and stratified scores
==================================================

Multiclass segmentation quality is summarized by the harmonic mean of
macro recall (mean diagonal of the row-normalized confusion matrix) and
macro precision (column-normalized). Stratified curves slice a binary
score along a covariate such as wind speed.
"""

import numpy as np

from sarrain import (ConfusionMatrix, binary_f1, confusion,
                     labels_from_channels, macro_f1, stratified)

# The hand-computable reference case
cm = ConfusionMatrix([[90, 10], [30, 70]])
print("2x2 macro F1 = %.5f (expected 0.80620)" % macro_f1(cm))

# Channel stacks collapse to labels by taking the highest threshold
# whose channel clears the cut
channels = np.array([0.9, 0.7, 0.2]).reshape(3, 1, 1)
print("channels (0.9, 0.7, 0.2) -> class %d" % labels_from_channels(channels)[0, 0])

# A noisy 4-class problem
rng = np.random.default_rng(5)
truth = rng.integers(0, 4, (64, 64))
pred = np.where(rng.random((64, 64)) < 0.7, truth, rng.integers(0, 4, (64, 64)))
cm = confusion(pred, truth, 4)
print("4-class macro F1 at 70%% agreement: %.3f" % macro_f1(cm))

# Stratify a binary score by wind speed; empty bins stay NaN, never 0
wind = rng.uniform(0, 20, (64, 64))
curve = stratified((pred > 0).astype(np.uint8), (truth > 0).astype(np.uint8),
                   wind, edges=[0, 4, 8, 12, 16, 25])
for k in range(len(curve.values)):
    print("wind %4.0f-%2.0f m/s: F1 %.3f  (n=%d)"
          % (curve.edges[k], curve.edges[k + 1], curve.values[k],
             curve.counts[k]))
