import csv

import numpy as np
import pytest
import torch

from unet_trainer.data import load_corpus
from unet_trainer.model import UNetConfig, build_model
from unet_trainer.train import (load_weights, save_history, save_weights,
                                train_unet)


@pytest.fixture(scope="module")
def pairs(corpus_dir):
    return load_corpus(corpus_dir)


class TestLoadCorpus:
    def test_shapes_and_types(self, pairs):
        assert len(pairs) == 4
        s0, target = pairs[0]
        assert s0.shape == (64, 64) and s0.dtype == np.float32
        assert target.shape == (3, 64, 64)
        # masks are nested: higher thresholds never exceed lower ones
        assert (target[2] <= target[1]).all()
        assert (target[1] <= target[0]).all()

    def test_missing_directory(self, tmp_path):
        with pytest.raises(ValueError):
            load_corpus(tmp_path / "nothing")


class TestTrainUnet:
    def test_zero_lr_leaves_weights_unchanged(self, pairs):
        cfg = UNetConfig(learning_rate=0.0, epochs=1, batch_size=2, seed=3)
        init = build_model(cfg)
        before = [p.detach().clone() for p in init.parameters()]
        model, _ = train_unet(pairs, cfg, model=init)
        for p, b in zip(model.parameters(), before):
            assert torch.equal(p, b)

    def test_empty_dataset(self):
        with pytest.raises(ValueError):
            train_unet([], UNetConfig(epochs=1))

    def test_same_seed_same_first_epoch_loss(self, pairs):
        cfg = UNetConfig(learning_rate=1e-4, epochs=1, batch_size=2, seed=9)
        _, h1 = train_unet(pairs, cfg)
        _, h2 = train_unet(pairs, cfg)
        assert h1["train_loss"][0] == pytest.approx(h2["train_loss"][0],
                                                    abs=1e-6)

    def test_history_lengths_with_validation(self, pairs):
        cfg = UNetConfig(learning_rate=1e-4, epochs=2, batch_size=2, seed=0)
        _, hist = train_unet(pairs[:3], cfg, val_pairs=pairs[3:])
        assert len(hist["train_loss"]) == 2
        assert len(hist["val_loss"]) == 2


class TestPersistence:
    def test_weights_round_trip(self, pairs, tmp_path):
        cfg = UNetConfig(learning_rate=1e-4, epochs=1, batch_size=2, seed=2)
        model, _ = train_unet(pairs, cfg)
        path = tmp_path / "w.pt"
        save_weights(model, path)
        loaded = load_weights(path)
        x = torch.from_numpy(pairs[0][0])[None, None]
        with torch.no_grad():
            assert torch.allclose(model(x), loaded(x))

    def test_history_csv_schema(self, tmp_path):
        hist = {"train_loss": [0.3, 0.2], "val_loss": [0.31]}
        path = tmp_path / "h.csv"
        save_history(hist, path)
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
        assert list(rows[0]) == ["epoch", "train_loss", "val_loss"]
        assert rows[1]["val_loss"] == ""
