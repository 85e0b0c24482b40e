import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import pytest

from slipsteer.vehicle import ESTIMATED_PARAMS, NOMINAL_PARAMS


@pytest.fixture
def nominal():
    return NOMINAL_PARAMS


@pytest.fixture
def estimated():
    return ESTIMATED_PARAMS
