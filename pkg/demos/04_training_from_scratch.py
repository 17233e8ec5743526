"""
Training the filter parameters with hand-rolled Adam
====================================================

The 24 filter gains and biases are fitted by minimizing per-pixel MSE
against the nested truth masks, using analytic gradients (verified
against central differences) and an Adam optimizer implemented from
scratch on numpy.
"""

import numpy as np

from sarrain import (KochParams, SceneConfig, TrainConfig, gen_scene,
                     grad_check, train)

dataset = []
for k in range(8):
    cfg = SceneConfig(seed=50 + k, size_px=64, n_cells=2,
                      cell_rate_range_mmh=(2.0, 15.0),
                      cell_radius_range_px=(6.0, 12.0),
                      bright_gain=2.0, speckle_looks=16)
    scene = gen_scene(cfg)
    dataset.append((scene.sigma0, scene.truth))

# Sanity check the backward pass on one instance before trusting it
err = grad_check(KochParams.initial(), dataset[0][0],
                 dataset[0][1].channels(), eps=1e-5)
print("gradient check max relative error: %.2e" % err)

cfg = TrainConfig(learning_rate=5e-3, epochs=60, batch_size=4, seed=0, runs=1)
params, history = train(dataset, cfg, KochParams.initial())

print("loss: %.4f -> %.4f (ratio %.2f)"
      % (history.train_loss[0], history.train_loss[-1],
         history.train_loss[-1] / history.train_loss[0]))

# Training is deterministic: same seed, same history
_, again = train(dataset, cfg, KochParams.initial())
assert again.train_loss == history.train_loss
print("rerun with the same seed reproduces the loss curve exactly")
