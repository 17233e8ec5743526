"""
From radar reflectivity to rain-class masks
===========================================

Weather-radar reflectivity (dBZ) maps to rain rate through the standard
Z = a R^b power law; thresholding at 1 / 3 / 10 mm/h yields the nested
class masks the segmentation models are trained against.
"""

import numpy as np

from sarrain import (THRESHOLDS_DBZ, THRESHOLDS_MMH, class_masks,
                     dbz_from_rainrate, rainrate_from_dbz)
from sarrain.grid import Grid

# The three class boundaries in dBZ
for rate, dbz in zip(THRESHOLDS_MMH, THRESHOLDS_DBZ):
    print("%5.1f mm/h  <->  %.2f dBZ (tabulated %.1f)"
          % (rate, dbz_from_rainrate(rate), dbz))

# The mapping is a bijection on positive rates
assert np.isclose(rainrate_from_dbz(dbz_from_rainrate(5.0)), 5.0)

# Build masks for a toy reflectivity field: a column gradient sweeping
# through all four classes
refl = Grid(np.linspace(0.0, 50.0, 64 * 64).reshape(64, 64).astype(np.float32),
            pixel_spacing_m=400.0)
masks = class_masks(refl)
print("pixels per class:",
      np.bincount(masks.labels().ravel(), minlength=4).tolist())

# labels() collapses the nested masks into a single 0..3 map
assert masks.labels().max() == 3
