import numpy as np
import pytest

from mqcsim import validate
from mqcsim.liouville import PhysicalParams


@pytest.fixture(scope="session")
def params():
    """Reference parameter set: rubidium D2 numbers at 320 K, rbar = 10 um."""
    return PhysicalParams()


@pytest.fixture(scope="session")
def acceptance_report(params):
    """Full validation report, computed once for the whole session."""
    return validate.run_all(params)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
