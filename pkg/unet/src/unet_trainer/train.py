"""MSE training loop with per-seed determinism and CSV history."""

from __future__ import annotations

import csv
import os
import tempfile

import numpy as np
import torch
from torch import nn

from .model import RainUNet, UNetConfig, build_model


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for k in range(0, n, batch_size):
        yield order[k:k + batch_size]


def _stack(pairs, idx) -> tuple[torch.Tensor, torch.Tensor]:
    x = torch.from_numpy(np.stack([pairs[i][0] for i in idx])[:, None])
    t = torch.from_numpy(np.stack([pairs[i][1] for i in idx]))
    return x, t


def train_unet(pairs, cfg: UNetConfig, val_pairs=None,
               model: RainUNet | None = None):
    """Fit the network on (sigma0, target) pairs; returns (model, history).

    History is a dict with 'train_loss' and 'val_loss' lists, one entry
    per epoch. Shuffling and initialization are seeded, so reruns with
    the same configuration reproduce the loss curve (up to framework
    nondeterminism).
    """
    if not pairs:
        raise ValueError("empty dataset")
    torch.manual_seed(cfg.seed)
    if model is None:
        model = build_model()
    opt = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    loss_fn = nn.MSELoss()
    history = {"train_loss": [], "val_loss": []}
    for epoch in range(cfg.epochs):
        rng = np.random.default_rng([cfg.seed, epoch])
        model.train()
        total, count = 0.0, 0
        for idx in _batches(len(pairs), cfg.batch_size, rng):
            x, t = _stack(pairs, idx)
            opt.zero_grad()
            loss = loss_fn(model(x), t)
            loss.backward()
            opt.step()
            total += float(loss.detach()) * len(idx)
            count += len(idx)
        history["train_loss"].append(total / count)
        if val_pairs:
            model.eval()
            with torch.no_grad():
                x, t = _stack(val_pairs, range(len(val_pairs)))
                history["val_loss"].append(float(loss_fn(model(x), t)))
    return model, history


def _atomic_write(path, writer):
    """Write via a temp file + rename so partial files are never seen."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as f:
            writer(f)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def save_weights(model: RainUNet, path) -> None:
    _atomic_write(path, lambda f: torch.save(model.state_dict(), f))


def load_weights(path) -> RainUNet:
    model = build_model()
    model.load_state_dict(torch.load(path, map_location="cpu",
                                     weights_only=True))
    model.eval()
    return model


def save_history(history, path) -> None:
    def write(f):
        import io
        text = io.TextIOWrapper(f, newline="")
        w = csv.writer(text)
        w.writerow(["epoch", "train_loss", "val_loss"])
        for e, loss in enumerate(history["train_loss"]):
            val = (history["val_loss"][e]
                   if e < len(history["val_loss"]) else "")
            w.writerow([e, f"{loss:.8f}", val])
        text.flush()
        text.detach()
    _atomic_write(path, write)
