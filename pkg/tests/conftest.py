"""Shared fixtures for the entcut test suite."""

import numpy as np
import pytest

from entanglement.space import harmonic_space
from entanglement.states import DensityOperator, bell_state, mix


@pytest.fixture
def qubits():
    """Two-level cutoff on both sides."""
    return harmonic_space(2, 2)


@pytest.fixture
def qutrits():
    return harmonic_space(3, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bell(qubits):
    return bell_state(qubits)


@pytest.fixture
def werner(qubits, bell):
    """p |Phi+><Phi+| + (1 - p) I/4."""
    def make(p: float) -> DensityOperator:
        return mix([bell, DensityOperator(np.eye(4) / 4)], [p, 1 - p])
    return make
