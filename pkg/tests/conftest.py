import numpy as np
import pytest

from linerecon import Family, Grid, InstrumentFunction, LineSpectrum
from linerecon.io import load_bundled_config

SEVEN_FREQS = (2.28, 2.36, 2.95, 3.02, 3.56, 3.64, 3.69)
SEVEN_INTENSITIES = (4.4, 4.6, 1.1, 3.2, 3.2, 2.8, 3.6)


@pytest.fixture(scope="session")
def config():
    return load_bundled_config()


@pytest.fixture(scope="session")
def model_if():
    return InstrumentFunction(Family.MODEL_GAUSSIAN, g=0.075, sigma0=0.05)


@pytest.fixture(scope="session")
def seven_lines():
    return LineSpectrum.from_arrays(SEVEN_FREQS, SEVEN_INTENSITIES, 0.2)


@pytest.fixture(scope="session")
def band():
    return Grid(2.0, 4.0, 101)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for check in mod.CHECKS:
        if check.key in mod.RESULTS:
            terminalreporter.write_line(mod.RESULTS[check.key])
