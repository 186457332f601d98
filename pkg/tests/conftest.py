import numpy as np
import pytest

from bccde import kernels


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    """Run the test once per available kernel backend."""
    prev = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
