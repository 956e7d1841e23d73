import numpy as np
import pytest

from cdspeed import kernels
from cdspeed.model import LZ3Params, lz2, lz3


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run a test once per kernel implementation."""
    if request.param == "numba" and not kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setenv(kernels.ENV_FLAG, "1" if request.param == "numpy" else "")
    return request.param


@pytest.fixture
def lz3_model():
    return lz3(LZ3Params(delta=0.1, kappa=1.0, tau=1.0))


@pytest.fixture
def lz3_traj(lz3_model):
    return lz3_model.trajectory()


@pytest.fixture
def lz2_traj():
    return lz2(LZ3Params(delta=0.1, kappa=1.0, tau=1.0)).trajectory()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def spin1_matrices():
    """Hand-written spin-1 matrices (m = +1, 0, -1), independent of spinops."""
    r = 1 / np.sqrt(2)
    sx = np.array([[0, r, 0], [r, 0, r], [0, r, 0]], dtype=complex)
    sy = np.array([[0, -1j * r, 0], [1j * r, 0, -1j * r], [0, 1j * r, 0]], dtype=complex)
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return sx, sy, sz
