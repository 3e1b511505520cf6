import numpy as np
import pytest

from fmcwhar.config import ArrayGeometry, RadarConfig, derive_params
from fmcwhar.dsp import blackman_harris_window, doppler_fft, range_fft, remove_dc


@pytest.fixture(scope="session")
def cfg():
    return RadarConfig()


@pytest.fixture(scope="session")
def geom():
    return ArrayGeometry()


@pytest.fixture(scope="session")
def dp(cfg):
    return derive_params(cfg)


@pytest.fixture(scope="session")
def window(cfg):
    return blackman_harris_window(cfg.samples_per_chirp)


@pytest.fixture(scope="session")
def chain(window):
    """raw frame -> (RangeMatrix, RangeDopplerMap)."""

    def run(frame):
        rm = range_fft(remove_dc(frame), window)
        return rm, doppler_fft(rm)

    return run


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
