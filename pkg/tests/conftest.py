import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from teleoscm import models  # noqa: E402
from teleoscm.scm import Bernoulli, Normal, make_model  # noqa: E402


@pytest.fixture
def heating():
    return models.heating()


@pytest.fixture
def smoking():
    return models.smoking()


@pytest.fixture
def chain_zxy():
    """Chain Z -> X -> Y with binary variables."""
    return make_model(
        "chain_zxy",
        [
            ("Z", "U_Z", "U_Z"),
            ("X", "U_X", "if(Z > 0, 1 - U_X, U_X)"),
            ("Y", "U_Y", "X + U_Y"),
        ],
        {"U_Z": Bernoulli(0.5), "U_X": Bernoulli(0.2), "U_Y": Normal(0.0, 1.0)},
    )
