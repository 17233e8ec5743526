import csv
import json

import numpy as np
import pytest

from unet_trainer.cli import main_predict, main_train


class TestTrainCli:
    def test_missing_args_exit_2(self):
        assert main_train([]) == 2

    def test_missing_data_dir(self, tmp_path, capsys):
        rc = main_train(["--data", str(tmp_path / "nope"),
                         "--out", str(tmp_path / "w.pt")])
        assert rc == 2
        assert json.loads(capsys.readouterr().err.strip())["error"] == "usage"

    def test_batch_32_at_100m_rejected(self, corpus_dir, tmp_path, capsys):
        rc = main_train(["--data", str(corpus_dir), "--resolution", "100",
                         "--batch", "32", "--epochs", "1",
                         "--out", str(tmp_path / "w.pt")])
        assert rc == 2

    def test_train_writes_weights_and_history(self, corpus_dir, tmp_path,
                                              capsys):
        out = tmp_path / "weights.pt"
        rc = main_train(["--data", str(corpus_dir), "--epochs", "2",
                         "--batch", "2", "--lr", "1e-4",
                         "--out", str(out)])
        assert rc == 0
        assert out.exists()
        with open(tmp_path / "weights_history.csv", newline="") as f:
            rows = list(csv.DictReader(f))
        assert [r["epoch"] for r in rows] == ["0", "1"]
        assert "final train loss" in capsys.readouterr().out


@pytest.fixture(scope="module")
def weights(corpus_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("w") / "weights.pt"
    assert main_train(["--data", str(corpus_dir), "--epochs", "1",
                       "--batch", "2", "--lr", "1e-4",
                       "--out", str(out)]) == 0
    return out


class TestPredictCli:
    def test_margin_too_small_exit_2(self, corpus_dir, weights, tmp_path):
        rc = main_predict(["--data", str(corpus_dir),
                           "--weights", str(weights), "--margin", "10",
                           "--out", str(tmp_path / "pred")])
        assert rc == 2

    def test_predictions_score_through_evaluation(self, corpus_dir, weights,
                                                  tmp_path):
        pred = tmp_path / "pred"
        rc = main_predict(["--data", str(corpus_dir),
                           "--weights", str(weights), "--out", str(pred)])
        assert rc == 0

        # exported grids load and score through the standard harness
        # without special-casing
        from sarrain.grid import read_grid
        from sarrain.metrics import confusion, labels_from_channels, macro_f1

        stem = pred / "swath000" / "patch000"
        channels = np.stack([read_grid(f"{stem}.{s}.sgrd").values
                             for s in ("y1", "y3", "y10")])
        assert channels.shape == (3, 64, 64)
        assert channels.min() >= 0.0 and channels.max() <= 1.0
        truth = np.stack(
            [read_grid(corpus_dir / "swath000" / f"patch000.{m}.sgrd").values
             for m in ("m1", "m3", "m10")])
        cm = confusion(labels_from_channels(channels),
                       labels_from_channels(truth.astype(np.float64)), 4)
        assert 0.0 <= macro_f1(cm) <= 1.0
