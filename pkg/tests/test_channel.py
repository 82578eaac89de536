import numpy as np
import pytest

from fluidkey import (
    PathSet,
    analytic_covariance,
    channel_response,
    mc_covariance,
    stream,
    validate_covariance,
)

from conftest import random_paths


def single_path(theta, phi, gain_var=1.0):
    return PathSet(elevations=[theta], azimuths=[phi], gain_vars=[gain_var])


def test_response_zero_phase():
    paths = single_path(0.7, 0.3)
    h = channel_response(np.array([[0.0, 0.0]]), paths, np.array([1.0]), wavelength=1.0)
    assert np.allclose(h, [1.0])


def test_response_half_wavelength():
    # direction [1, 0], antenna at lambda/2 along x: phase pi
    paths = single_path(np.pi / 2, 0.0)
    h = channel_response(np.array([[0.5, 0.0]]), paths, np.array([1.0]), wavelength=1.0)
    assert np.allclose(h, [-1.0])


def test_response_coherent_sum():
    paths = PathSet(elevations=[0.2, 1.3], azimuths=[0.4, 2.2], gain_vars=[0.5, 0.5])
    h = channel_response(np.array([[0.0, 0.0]]), paths, np.array([1.0, 1.0]), wavelength=1.0)
    assert np.allclose(h, [2.0])


def test_response_rejects_wrong_gain_count():
    paths = single_path(0.5, 0.5)
    with pytest.raises(ValueError):
        channel_response(np.zeros((2, 2)), paths, np.array([1.0, 1.0]), wavelength=1.0)


def test_analytic_unit_diagonal(desk_scenario):
    paths = random_paths(desk_scenario, seed=3)
    rng = np.random.default_rng(0)
    pos = rng.uniform(0, 20, (4, 2))
    R = analytic_covariance(pos, paths, 1.0)
    validate_covariance(R, expected_diag=1.0)


def test_analytic_single_path_rank_one():
    paths = single_path(0.9, 1.4, gain_var=1.0)
    pos = np.random.default_rng(1).uniform(0, 10, (5, 2))
    R = analytic_covariance(pos, paths, 1.0)
    assert np.allclose(np.abs(R), 1.0)
    eig = np.linalg.eigvalsh(R)
    assert eig[-1] == pytest.approx(5.0, abs=1e-9)
    assert np.abs(eig[:-1]).max() < 1e-9


def test_analytic_translation_invariance(desk_scenario):
    paths = random_paths(desk_scenario, seed=4)
    rng = np.random.default_rng(2)
    pos = rng.uniform(0, 20, (4, 2))
    for offset in ([1.3, -0.7], [100.0, 250.0]):
        shifted = pos + np.asarray(offset)
        d = np.abs(
            analytic_covariance(pos, paths, 1.0) - analytic_covariance(shifted, paths, 1.0)
        ).max()
        assert d < 1e-10


def test_analytic_permutation_equivariance(desk_scenario):
    paths = random_paths(desk_scenario, seed=5)
    rng = np.random.default_rng(3)
    pos = rng.uniform(0, 20, (4, 2))
    perm = np.array([2, 0, 3, 1])
    R = analytic_covariance(pos, paths, 1.0)
    Rp = analytic_covariance(pos[perm], paths, 1.0)
    assert np.allclose(Rp, R[np.ix_(perm, perm)], atol=1e-12)


def test_analytic_batched_matches_loop(desk_scenario):
    paths = random_paths(desk_scenario, seed=6)
    rng = np.random.default_rng(4)
    stack = rng.uniform(0, 20, (7, 4, 2))
    batched = analytic_covariance(stack, paths, 1.0)
    for i in range(7):
        assert np.allclose(batched[i], analytic_covariance(stack[i], paths, 1.0))


def test_mc_single_sample_outer_product(desk_scenario):
    # fixed unit gains bypass the randomness: R equals h h^H exactly
    paths = random_paths(desk_scenario, seed=7)
    pos = np.random.default_rng(5).uniform(0, 20, (4, 2))
    gains = np.ones((1, paths.n_paths), dtype=complex)
    R = mc_covariance(pos, paths, 1.0, n_samples=1, gains=gains)
    h = channel_response(pos, paths, gains[0], 1.0)
    assert np.allclose(R, np.outer(h, h.conj()))


def test_mc_diagonal_real_nonnegative(desk_scenario):
    paths = random_paths(desk_scenario, seed=8)
    pos = np.random.default_rng(6).uniform(0, 20, (4, 2))
    R = mc_covariance(pos, paths, 1.0, n_samples=50, rng=stream(8, "mc"))
    d = np.diagonal(R)
    assert np.abs(d.imag).max() == 0.0
    assert (d.real >= 0).all()
    assert np.abs(R - R.conj().T).max() == 0.0


def test_mc_matches_analytic(desk_scenario):
    # one instance of the acceptance-scale oracle comparison
    paths = random_paths(desk_scenario, seed=9)
    pos = np.random.default_rng(7).uniform(0, 20, (4, 2))
    m = 10_000
    R_hat = mc_covariance(pos, paths, 1.0, n_samples=m, rng=stream(9, "mc"))
    R = analytic_covariance(pos, paths, 1.0)
    assert np.linalg.norm(R_hat - R) <= 5.0 * 4 / np.sqrt(m)


def test_mc_convergence_rate(desk_scenario):
    # Frobenius error shrinks like 1/sqrt(M): log-log slope -0.5 +- 0.1
    paths = random_paths(desk_scenario, seed=10)
    pos = np.random.default_rng(8).uniform(0, 20, (4, 2))
    R = analytic_covariance(pos, paths, 1.0)
    ms = [100, 1000, 10_000]
    errs = []
    for m in ms:
        reps = [
            np.linalg.norm(mc_covariance(pos, paths, 1.0, m, stream(10, "mc", k)) - R)
            for k in range(8)
        ]
        errs.append(np.mean(reps))
    slope = np.polyfit(np.log10(ms), np.log10(errs), 1)[0]
    assert abs(slope + 0.5) < 0.1


def test_mc_rejects_bad_sample_count(desk_scenario):
    paths = random_paths(desk_scenario, seed=11)
    with pytest.raises(ValueError):
        mc_covariance(np.zeros((2, 2)), paths, 1.0, n_samples=0, rng=stream(0, "mc"))


def test_validate_covariance_flags_violations():
    with pytest.raises(ValueError):
        validate_covariance(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        validate_covariance(np.array([[1.0, 0.0], [0.0, -1.0]]))
