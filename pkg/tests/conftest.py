import numpy as np
import pytest

from qmeter.model import DensityState
from qmeter.models import SX, SY, SZ, bloch_xy_state, luders, measure_prepare, rotation_z_to_x, unsharp


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def zero():
    return DensityState.pure([1, 0])


@pytest.fixture
def plus():
    return DensityState.pure(np.array([1, 1]) / np.sqrt(2))


@pytest.fixture
def mixed():
    return DensityState.maximally_mixed(2)


@pytest.fixture
def luders_z():
    return luders(SZ)


@pytest.fixture
def luders_x():
    return luders(SX)


@pytest.fixture
def unsharp_z():
    return unsharp(SZ, 0.5)


@pytest.fixture
def psi0():
    return bloch_xy_state(np.pi / 6)


@pytest.fixture
def mp(psi0):
    return measure_prepare(SZ, psi0)


@pytest.fixture
def rot():
    return rotation_z_to_x()


@pytest.fixture
def paulis():
    return SX, SY, SZ
