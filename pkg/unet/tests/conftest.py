import pytest

from sarrain.synth import SceneConfig, gen_corpus


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """A small on-disk dataset in the standard layout."""
    root = tmp_path_factory.mktemp("unet") / "corpus"
    cfg = SceneConfig(seed=21, size_px=64, n_cells=2,
                      cell_rate_range_mmh=(2.0, 20.0),
                      cell_radius_range_px=(6.0, 12.0),
                      bright_gain=2.0, speckle_looks=16)
    gen_corpus(cfg, 4, root, inject_shifts=False)
    return root
