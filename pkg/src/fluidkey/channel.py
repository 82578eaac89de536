"""Multipath channel responses and antenna-position-dependent covariances.

The channel seen at antenna position t is a sum of L plane waves,

    h(t) = sum_l g_l * exp(j * (2 pi / wavelength) * t . rho_l),

with rho_l the planar direction of path l.  Path gains are mutually
uncorrelated, zero-mean, circularly-symmetric complex Gaussian with the
variances stored in the `PathSet`, so the channel covariance has the closed
form implemented by `analytic_covariance`; `mc_covariance` estimates the same
matrix by sample averaging and exists as an independent cross-check and as
the cost model for complexity experiments.
"""

from __future__ import annotations

import numpy as np

from .scenario import PathSet

__all__ = [
    "steering_matrix",
    "channel_response",
    "analytic_covariance",
    "sample_gains",
    "mc_covariance",
    "validate_covariance",
]


def steering_matrix(positions: np.ndarray, paths: PathSet, wavelength: float) -> np.ndarray:
    """Per-antenna, per-path phase factors exp(j 2pi/lambda t_n . rho_l).

    positions may carry leading batch dimensions: (..., N, 2) -> (..., N, L).
    """
    pos = np.asarray(positions, dtype=float)
    phase = (2.0 * np.pi / wavelength) * (pos @ paths.directions.T)
    return np.exp(1j * phase)


def channel_response(
    positions: np.ndarray, paths: PathSet, gains: np.ndarray, wavelength: float
) -> np.ndarray:
    """Channel vector h with h[n] = sum_l gains[l] exp(j 2pi/lambda t_n . rho_l).

    `gains` of shape (L,) gives one channel vector (N,); shape (L, k) gives a
    batch of k vectors as columns, (N, k).
    """
    gains = np.asarray(gains)
    if gains.shape[0] != paths.n_paths:
        raise ValueError(f"expected {paths.n_paths} gains, got {gains.shape[0]}")
    return steering_matrix(positions, paths, wavelength) @ gains


def analytic_covariance(
    positions: np.ndarray, paths: PathSet, wavelength: float
) -> np.ndarray:
    """Exact channel covariance R = E{h h^H} under uncorrelated path gains.

    R[i, j] = sum_l gain_vars[l] * exp(j 2pi/lambda (t_i - t_j) . rho_l).
    Supports batched positions (..., N, 2) -> (..., N, N).  The result is
    Hermitian positive semidefinite by construction and depends only on
    position differences (translation invariant).
    """
    a = steering_matrix(positions, paths, wavelength)
    return (a * paths.gain_vars) @ np.swapaxes(a.conj(), -1, -2)


def sample_gains(paths: PathSet, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """(n_samples, L) i.i.d. circularly-symmetric complex Gaussian path gains."""
    scale = np.sqrt(paths.gain_vars / 2.0)
    re = rng.standard_normal((n_samples, paths.n_paths))
    im = rng.standard_normal((n_samples, paths.n_paths))
    return (re + 1j * im) * scale


def mc_covariance(
    positions: np.ndarray,
    paths: PathSet,
    wavelength: float,
    n_samples: int,
    rng: np.random.Generator | None = None,
    gains: np.ndarray | None = None,
) -> np.ndarray:
    """Monte-Carlo estimate of the channel covariance from n_samples draws.

    Averages h h^H over i.i.d. gain draws and re-Hermitizes the result so
    downstream log-det code sees an exactly Hermitian matrix.  Passing
    `gains` (n_samples, L) bypasses the random draw: used for fixed
    common-random-number evaluation inside optimizers and as a test hook.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if gains is None:
        if rng is None:
            raise ValueError("either rng or gains must be provided")
        gains = sample_gains(paths, n_samples, rng)
    elif gains.shape != (n_samples, paths.n_paths):
        raise ValueError("gains must have shape (n_samples, n_paths)")
    h = channel_response(positions, paths, gains.T, wavelength)  # (N, n_samples)
    R = (h @ h.conj().T) / n_samples
    return 0.5 * (R + R.conj().T)


def validate_covariance(
    R: np.ndarray,
    expected_diag: float | None = None,
    herm_tol: float = 1e-10,
    psd_tol: float = 1e-8,
) -> None:
    """Raise ValueError unless R is Hermitian PSD (and has the stated diagonal)."""
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("covariance must be a square matrix")
    if np.abs(R - R.conj().T).max() > herm_tol:
        raise ValueError("covariance is not Hermitian")
    eig = np.linalg.eigvalsh(R)
    if eig.min() < -psd_tol * max(eig.max(), 0.0):
        raise ValueError(f"covariance is not PSD (min eigenvalue {eig.min():g})")
    if expected_diag is not None:
        d = np.diagonal(R)
        if np.abs(d.imag).max() > herm_tol or np.abs(d.real - expected_diag).max() > 1e-9:
            raise ValueError("covariance diagonal does not match the total path power")
