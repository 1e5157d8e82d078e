import numpy as np
import pytest

from ensemblelab.spectra import ObservableSet


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def qutrit():
    return ObservableSet.from_spectrum([0.0, 1.0, 2.0])


def random_spectrum(rng, d, low=-3.0, high=3.0):
    """Generic nondegenerate energies."""
    while True:
        h = rng.uniform(low, high, size=d)
        if np.min(np.diff(np.sort(h))) > 1e-3:
            return ObservableSet.from_spectrum(h)


def random_interior_state(rng, d):
    return rng.dirichlet(np.ones(d))
