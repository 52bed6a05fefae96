import numpy as np
import pytest

from asyncofdm.link import OfdmConfig
from asyncofdm.sinr import NetworkParams

# Reference parameter set used throughout: 23 dBm over 10 MHz, -174 dBm/Hz
# noise PSD, 9 dB noise figure (noise floor -95 dBm, so E/N0 = 118 dB).
BUDGET = dict(tx_power_dbm=23.0, bandwidth_hz=1.0e7,
              noise_psd_dbm_hz=-174.0, noise_figure_db=9.0)


def budget_params(density, alpha, threshold_db):
    return NetworkParams.from_budget(density, alpha, threshold_db, **BUDGET)


@pytest.fixture(scope="session")
def cfg():
    return OfdmConfig.centered(1024, 72, -300, 299)


@pytest.fixture(scope="session")
def small_cfg():
    return OfdmConfig.centered(64, 8, -24, 23)
