import numpy as np
import pytest

from fputwaves import storage
from fputwaves.utils.dependencies import get_core, get_light_context, get_solitary

C = 1.45
MU = 0.02


@pytest.fixture(scope="session")
def wave():
    return get_solitary(C)


@pytest.fixture(scope="session")
def core():
    return get_core(C, MU)


@pytest.fixture(scope="session")
def context():
    return get_light_context(C, MU)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def output_dir(tmp_path):
    storage.set_output_dir(str(tmp_path / "output"))
    yield tmp_path / "output"
    storage.set_output_dir(None)
