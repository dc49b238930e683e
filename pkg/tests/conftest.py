import numpy as np
import pytest
from hypothesis import settings

from freelyap.spectral_measures import atomic_measure, compressed_mp_measure, mp_measure, point_mass

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def measures():
    """Test measures keyed by a short name."""
    return {
        "mp0.5": mp_measure(0.5),
        "mp1": mp_measure(1.0),
        "mp2": mp_measure(2.0),
        "mp5": mp_measure(5.0),
        "comp": compressed_mp_measure(0.5, 2.0),
        "atoms3": atomic_measure({1.0: 0.3, 2.0: 0.4, 5.0: 0.3}, "3-atom"),
        "delta1": point_mass(1.0),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import _LINES
    except ImportError:
        return
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
