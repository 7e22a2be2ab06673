"""Shared helpers: seeded random state generation (uniform on the sphere)."""

import numpy as np
import pytest

from spinmetro import SingleAtomState
from spinmetro.fock3 import PairState

# One documented base seed for every randomized check in the suite.
BASE_SEED = 20240810


def random_amplitudes(rng, dim: int) -> np.ndarray:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_single_atom_state(rng, F: int) -> SingleAtomState:
    return SingleAtomState(F, random_amplitudes(rng, 2 * F + 1))


def random_pair_state(rng, N: int) -> PairState:
    return PairState(N, random_amplitudes(rng, N // 2 + 1))


@pytest.fixture
def rng():
    return np.random.default_rng(BASE_SEED)
