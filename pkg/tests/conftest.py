import numpy as np
import pytest

from loadmotif import distance


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # Pay the JIT compilation cost once, outside any timed assertions
    # that are not explicitly about cold-start behaviour.
    distance.dtw([0.0, 1.0], [1.0, 0.0])
    distance.r_dtw([0.0, 1.0], [1.0, 0.0], np.ones((2, 2)))
    distance.reset_kernel_counters()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
