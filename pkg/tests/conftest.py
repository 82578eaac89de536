import numpy as np
import pytest

from fluidkey import Region, Scenario, project_power, sample_paths, stream


@pytest.fixture
def desk_scenario():
    """Paper-scale constants: N=S=4, L=8, sigma^2=0.1, region [0, 20]^2."""
    return Scenario()


@pytest.fixture
def small_scenario():
    """Cheap configuration for optimizer unit tests."""
    return Scenario(n_antennas=2, n_pilots=2, n_paths=4, region=Region(0, 8, 0, 8))


def random_paths(scenario, seed=0, total_power=1.0):
    return sample_paths(scenario, stream(seed, "paths"), total_power=total_power)


def random_precoder(n, s, p_max, rng):
    raw = rng.standard_normal((n, s)) + 1j * rng.standard_normal((n, s))
    return project_power(raw, p_max)


def random_covariance(n, rng, trace=None):
    """Random Hermitian PSD matrix, optionally with a fixed trace."""
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    R = a @ a.conj().T
    if trace is not None:
        R *= trace / np.trace(R).real
    return R
