"""Training loop for the differentiable Koch filter: MSE loss, Adam,
finite-difference gradient checking and multi-run statistics.

Everything here is deterministic given the seed: shuffling uses a
counter-based generator keyed on (seed, epoch) and gradients are reduced
in a fixed order, so two runs with the same configuration produce
bit-identical parameter trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .koch import (FilterBankSpec, KochParams, Prediction, highpass_bank,
                   koch_backward, koch_forward)
from .zr import ClassMasks


class DivergenceError(RuntimeError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int):
        super().__init__(f"non-finite loss at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 32
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    runs: int = 5

    def __post_init__(self):
        if self.learning_rate < 0 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("invalid training configuration")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)


class Adam:
    """Standard Adam update with bias correction, over a flat vector."""

    def __init__(self, n: int, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _target(item) -> np.ndarray:
    if isinstance(item, ClassMasks):
        return item.channels()
    return np.asarray(item, dtype=np.float64)


def mse_loss(pred: Prediction, target) -> tuple[float, np.ndarray]:
    """Mean square error over all pixels and channels, with its gradient.

    The mean runs jointly over channels and pixels; grad = 2 (y - t) / N.
    """
    t = _target(target)
    y = pred.channels if isinstance(pred, Prediction) else np.asarray(pred, dtype=np.float64)
    if y.shape != t.shape:
        raise ValueError(f"prediction {y.shape} vs target {t.shape}")
    resid = y - t
    n = resid.size
    return float((resid**2).mean()), 2.0 * resid / n


def _input_values(patch) -> np.ndarray:
    # accepts a dataset Patch, a Grid, or a bare array
    for attr in ("sigma0_norm", "values"):
        obj = getattr(patch, attr, None)
        if obj is not None:
            return obj.values if hasattr(obj, "values") else np.asarray(obj)
    return np.asarray(patch)


def _dataset_loss(banks, targets, p, spec) -> float:
    total = 0.0
    for bank, t in zip(banks, targets):
        loss, _ = mse_loss(koch_forward(None, p, spec, bank=bank), t)
        total += loss
    return total / len(banks)


def train(dataset, cfg: TrainConfig, init: KochParams,
          spec: FilterBankSpec = FilterBankSpec(),
          val_dataset=None) -> tuple[KochParams, TrainHistory]:
    """Run Adam over shuffled mini-batches for cfg.epochs (single run).

    ``dataset`` is a list of (patch, ClassMasks); the patch may be a
    Grid, an array, or a dataset Patch (its normalized sigma0 is used).
    """
    if not dataset:
        raise ValueError("training set is empty")

    banks = [highpass_bank(_input_values(x), spec) for x, _ in dataset]
    targets = [_target(t) for _, t in dataset]
    if val_dataset:
        val_banks = [highpass_bank(_input_values(x), spec) for x, _ in val_dataset]
        val_targets = [_target(t) for _, t in val_dataset]

    params = init.flat()
    opt = Adam(params.size, cfg.learning_rate, cfg.adam_beta1,
               cfg.adam_beta2, cfg.adam_eps)
    history = TrainHistory()
    n = len(dataset)

    for epoch in range(cfg.epochs):
        order = np.random.default_rng([cfg.seed, epoch]).permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            grad = np.zeros_like(params)
            batch_loss = 0.0
            p = KochParams.from_flat(params, init.a, init.c)
            for idx in batch:
                pred = koch_forward(None, p, spec, bank=banks[idx])
                loss, grad_y = mse_loss(pred, targets[idx])
                dK, dB = koch_backward(None, p, grad_y, spec, bank=banks[idx])
                grad += np.concatenate([dK.ravel(), dB.ravel()])
                batch_loss += loss
            grad /= len(batch)
            epoch_loss += batch_loss
            params = opt.step(params, grad)
        epoch_loss /= n
        if not np.isfinite(epoch_loss):
            raise DivergenceError(epoch)
        history.train_loss.append(epoch_loss)
        if val_dataset:
            p = KochParams.from_flat(params, init.a, init.c)
            history.val_loss.append(_dataset_loss(val_banks, val_targets, p, spec))

    return KochParams.from_flat(params, init.a, init.c), history


def train_runs(dataset, cfg: TrainConfig, init: KochParams,
               spec: FilterBankSpec = FilterBankSpec(), val_dataset=None):
    """Repeat training with seeds seed .. seed+runs-1.

    Returns (results, summary) where results is a list of
    (KochParams, TrainHistory) and summary maps metric name to
    (mean, std) over runs.
    """
    from dataclasses import replace

    results = []
    for k in range(cfg.runs):
        run_cfg = replace(cfg, seed=cfg.seed + k, runs=1)
        results.append(train(dataset, run_cfg, init, spec, val_dataset))
    finals = np.array([h.train_loss[-1] for _, h in results])
    summary = {"final_train_loss": (float(finals.mean()), float(finals.std()))}
    if val_dataset:
        vals = np.array([h.val_loss[-1] for _, h in results])
        summary["final_val_loss"] = (float(vals.mean()), float(vals.std()))
    return results, summary


def grad_check(p: KochParams, patch, target,
               spec: FilterBankSpec = FilterBankSpec(),
               eps: float = 1e-5) -> float:
    """Max relative error of analytic vs central-difference gradients."""
    if not 0 < eps <= 1e-2:
        raise ValueError("eps must lie in (0, 1e-2]")
    values = _input_values(patch)
    bank = highpass_bank(values, spec)
    t = _target(target)

    pred = koch_forward(None, p, spec, bank=bank)
    _, grad_y = mse_loss(pred, t)
    dK, dB = koch_backward(None, p, grad_y, spec, bank=bank)
    analytic = np.concatenate([dK.ravel(), dB.ravel()])

    flat = p.flat()
    numeric = np.zeros_like(flat)
    for i in range(flat.size):
        for sign, slot in ((+1, 0), (-1, 1)):
            v = flat.copy()
            v[i] += sign * eps
            q = KochParams.from_flat(v, p.a, p.c)
            loss, _ = mse_loss(koch_forward(None, q, spec, bank=bank), t)
            numeric[i] += sign * loss
        numeric[i] /= 2 * eps

    # the floor keeps near-zero gradients (saturated sigmoids) from being
    # compared below the absolute resolution of central differences
    scale = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-6)
    return float(np.max(np.abs(analytic - numeric) / scale))
