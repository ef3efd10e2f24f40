import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, scale=0.5):
    a = rng.normal(size=(3, 3)) * scale
    return np.eye(3) + a @ a.T


@pytest.fixture
def spd(rng):
    return random_spd(rng)
