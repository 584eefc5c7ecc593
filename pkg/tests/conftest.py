import numpy as np
import pytest

from chaosctl import find_fixed_point, lpa_map

# Known chaotic-regime fixed point of the default LPA parameters (4 decimals).
LPA_FIXED_POINT = (28.0120, 22.4096, 4.6251)


@pytest.fixture(scope="session")
def lpa():
    return lpa_map()


@pytest.fixture(scope="session")
def lpa_k(lpa):
    """Fixed point of the default LPA map, solved to near machine precision."""
    return find_fixed_point(lpa, np.array([20.0, 20.0, 5.0]), tol=1e-13)
