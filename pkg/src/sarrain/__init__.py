"""sarrain: rain-cell segmentation toolkit for SAR ocean backscatter."""

from .grid import (Grid, GridGeometry, distance_to_coast, read_grid, resample,
                   tile, write_grid)
from .gmf import GmfSpec, Sigma0Grid, gmf_eval, incidence_normalize, load_gmf
from .zr import (ClassMasks, THRESHOLDS_DBZ, THRESHOLDS_MMH, ZrParams,
                 class_masks, dbz_from_rainrate, rainrate_from_dbz)
from .register import RegistrationOffset, apply_offset, register
from .koch import (FilterBankSpec, KochParams, Prediction, highpass_bank,
                   koch_backward, koch_binary, koch_clipped, koch_forward,
                   sigmoid)
from .training import (Adam, TrainConfig, TrainHistory, grad_check, mse_loss,
                       train, train_runs)
from .dataset import (OffsetStats, Patch, SplitAssignment, extract_patches,
                      registration_stats, split_balanced)
from .lightning import (Flash, LightningEvent, cluster_events, group_flashes,
                        haversine_km, project_events, rasterize_lightning)
from .metrics import (ConfusionMatrix, StratifiedCurve, binary_f1, confusion,
                      detection_probability, labels_from_channels, macro_f1,
                      stratified)
from .synth import Scene, SceneConfig, gen_corpus, gen_scene

__version__ = "0.1.0"
