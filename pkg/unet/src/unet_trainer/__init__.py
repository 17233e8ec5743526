"""Encoder-decoder rain segmentation trainer.

Consumes dataset directories produced by the sarrain toolkit (SGRID
grids + manifest CSVs) and exports prediction grids the toolkit's
evaluation harness can score directly.
"""

from .data import load_corpus, load_split
from .model import (EXPECTED_PARAMS, RECEPTIVE_FIELD_PX, RainUNet,
                    UNetConfig, build_model, count_params, receptive_field)
from .predict import predict_mosaic
from .train import (load_weights, save_history, save_weights, train_unet)

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_PARAMS", "RECEPTIVE_FIELD_PX", "RainUNet", "UNetConfig",
    "build_model", "count_params", "receptive_field", "load_corpus",
    "load_split", "predict_mosaic", "train_unet", "save_weights",
    "load_weights", "save_history", "__version__",
]
