"""
Lightning events as an independent rain proxy
=============================================

Where weather radar is unavailable, geostationary lightning events act
as a rain proxy: events are grouped into flashes (330 ms / 16.5 km
transitive closure), clustered on the grid, and rasterized into a
binary mask for any acquisition inside a 20-minute window.
"""

import numpy as np

from sarrain.grid import GridGeometry
from sarrain.lightning import (LightningEvent, cluster_events, group_flashes,
                               haversine_km, project_events,
                               rasterize_lightning)

# Two storms: a tight burst near the origin and a later distant one
events = [
    LightningEvent(10.00, -0.010, 0.010),
    LightningEvent(10.20, -0.011, 0.011),   # 0.2 s, ~150 m: same flash
    LightningEvent(10.45, -0.012, 0.010),   # chained through the second
    LightningEvent(300.0, -0.200, 0.200),   # separate storm
]
flashes = group_flashes(events)
print("%d events -> %d flashes, sizes %s"
      % (len(events), len(flashes), [len(f.events) for f in flashes]))

# Project onto a 400 m grid anchored at (0, 0) and cluster 8-adjacently
geom = GridGeometry(64, 64, 400.0, (0.0, 0.0))
projected, rejected = project_events(events, geom)
clusters = cluster_events(projected, geom)
print("%d grid clusters (%d events off-grid)" % (len(clusters), rejected))

# Rasterize only clusters within 20 minutes of the acquisition
times = [10.0] * len(clusters)
mask = rasterize_lightning(clusters, geom, times, acquisition_time_s=100.0)
print("mask covers %d pixels" % int(mask.values.sum()))

print("haversine sanity: 1 deg of latitude = %.1f km"
      % haversine_km(0.0, 0.0, 1.0, 0.0))
