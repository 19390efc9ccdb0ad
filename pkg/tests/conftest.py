import numpy as np
import pytest

from pddf.dsp import ChainConfig, calibrate_offset
from pddf.profiles import (
    DEFAULT_DECIMATION,
    DEFAULT_FREQUENCY_OFFSET_HZ,
    default_geometry,
    default_radio,
    desk_radio,
)


@pytest.fixture(scope="session")
def geometry():
    return default_geometry()


@pytest.fixture(scope="session")
def desk():
    return desk_radio()


@pytest.fixture(scope="session")
def heavy():
    return default_radio()


@pytest.fixture(scope="session")
def desk_chain(desk, geometry):
    chain = ChainConfig.for_radio(desk, DEFAULT_DECIMATION,
                                  translation_hz=DEFAULT_FREQUENCY_OFFSET_HZ)
    return chain.with_calibration(calibrate_offset(desk, geometry, chain))


@pytest.fixture(scope="session")
def heavy_chain(heavy, geometry):
    chain = ChainConfig.for_radio(heavy, DEFAULT_DECIMATION,
                                  translation_hz=DEFAULT_FREQUENCY_OFFSET_HZ)
    return chain.with_calibration(calibrate_offset(heavy, geometry, chain))


def circular_mean_deg(angles_deg):
    a = np.deg2rad(np.asarray(angles_deg, dtype=float))
    return float(np.degrees(np.arctan2(np.sin(a).mean(), np.cos(a).mean())) % 360.0)
