import numpy as np
import pytest

from normrays import secring


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def fs_metric():
    return secring.fubini_study()


@pytest.fixture(scope="session")
def cubic_metric():
    """Symplectic potential ``u_FS + 0.3 y^3`` (smooth, not Fubini–Study)."""
    sym = secring.FS_DATA.add(lambda y: 0.3 * y**3, lambda y: 0.9 * y**2, lambda y: 1.8 * y)
    return secring.from_symplectic(sym, label="cubic")
