import numpy as np
import pytest

from sarrain.grid import Grid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

