import numpy as np
import pytest

from fluidkey import KgrNumericalError, kgr, kgr_batch, second_order_stats

from conftest import random_covariance, random_precoder


def test_stats_zero_precoder():
    P = np.zeros((3, 2), dtype=complex)
    R = np.eye(3, dtype=complex)
    r_a, r_b, cross = second_order_stats(P, R, 0.1)
    assert np.allclose(r_a, 0.0)
    assert np.allclose(r_b, 0.1 * np.eye(2))
    assert np.allclose(cross, 0.0)


def test_stats_scalar_case():
    r_a, r_b, cross = second_order_stats(np.array([[1.0]]), np.array([[1.0]]), 0.1)
    assert r_a[0, 0] == pytest.approx(1.1)
    assert r_b[0, 0] == pytest.approx(1.1)
    assert cross[0, 0] == pytest.approx(1.0)


def test_stats_unitary_columns_noiseless():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    q, _ = np.linalg.qr(a)
    expected = q.T @ q.conj()
    r_a, r_b, cross = second_order_stats(q, np.eye(4, dtype=complex), 0.0)
    assert np.allclose(r_a, expected)
    assert np.allclose(r_b, expected)
    assert np.allclose(cross, expected)


def test_stats_match_simulated_probing():
    # simulate the two-way probing protocol itself: both ends observe
    # x = P^T h, the uplink noise passes through the precoder, the downlink
    # noise does not; sample second moments must approach the closed forms
    rng = np.random.default_rng(42)
    n, s, s2, m = 3, 2, 0.3, 200_000
    P = random_precoder(n, s, 1.0, rng)
    R = random_covariance(n, rng, trace=float(n))
    L = np.linalg.cholesky(R + 1e-12 * np.eye(n))

    def cn(rows, cols):
        return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)

    h = L @ cn(n, m)
    y_up = P.T @ h + P.T @ (np.sqrt(s2) * cn(n, m))
    y_down = P.T @ h + np.sqrt(s2) * cn(s, m)
    r_a_hat = y_up @ y_up.conj().T / m
    r_b_hat = y_down @ y_down.conj().T / m
    cross_hat = y_up @ y_down.conj().T / m
    r_a, r_b, cross = second_order_stats(P, R, s2)
    tol = 12.0 / np.sqrt(m)
    assert np.abs(r_a_hat - r_a).max() < tol
    assert np.abs(r_b_hat - r_b).max() < tol
    assert np.abs(cross_hat - cross).max() < tol


def test_stats_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        second_order_stats(np.ones((3, 2)), np.eye(4), 0.1)


def test_stats_marginals_hermitian_psd():
    rng = np.random.default_rng(1)
    for _ in range(10):
        P = random_precoder(4, 3, 1.0, rng)
        R = random_covariance(4, rng)
        r_a, r_b, _ = second_order_stats(P, R, 0.1)
        for block in (r_a, r_b):
            assert np.abs(block - block.conj().T).max() < 1e-10
            assert np.linalg.eigvalsh(block).min() > -1e-10


def test_kgr_worked_scalar_value():
    got = kgr(np.array([[1.0]]), np.array([[1.0]]), 0.1)
    assert got == pytest.approx(np.log2(1.21 / 0.21), abs=1e-6)
    assert got == pytest.approx(2.5264, abs=1e-3)


def test_kgr_zero_precoder_is_zero():
    assert kgr(np.zeros((4, 4)), np.eye(4), 0.1) == 0.0


def test_kgr_scalar_matches_correlation_formula():
    # oracle: mutual information of two scalar Gaussians, -log2(1 - |rho|^2)
    rng = np.random.default_rng(2)
    for _ in range(100):
        p = rng.standard_normal() + 1j * rng.standard_normal()
        r = rng.uniform(0.1, 5.0)
        s2 = rng.uniform(0.01, 2.0)
        P = np.array([[p]])
        R = np.array([[r]], dtype=complex)
        c = (abs(p) ** 2) * r
        a = c + s2 * abs(p) ** 2
        b = c + s2
        rho_sq = c**2 / (a * b)
        expected = -np.log2(1.0 - rho_sq)
        assert kgr(P, R, s2) == pytest.approx(expected, abs=1e-10)


def test_kgr_nonnegative_randomized():
    rng = np.random.default_rng(3)
    for _ in range(50):
        P = random_precoder(4, 4, 1.0, rng)
        R = random_covariance(4, rng)
        assert kgr(P, R, 0.1) >= 0.0


def test_kgr_antenna_permutation_invariance():
    rng = np.random.default_rng(4)
    P = random_precoder(4, 4, 1.0, rng)
    R = random_covariance(4, rng)
    base = kgr(P, R, 0.1)
    for _ in range(5):
        perm = rng.permutation(4)
        assert kgr(P[perm], R[np.ix_(perm, perm)], 0.1) == pytest.approx(base, abs=1e-9)


def test_kgr_pilot_rotation_invariance():
    rng = np.random.default_rng(5)
    P = random_precoder(4, 4, 1.0, rng)
    R = random_covariance(4, rng)
    base = kgr(P, R, 0.1)
    for _ in range(5):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        u, _ = np.linalg.qr(a)
        assert kgr(P @ u, R, 0.1) == pytest.approx(base, abs=1e-9)


def test_kgr_monotone_in_noise():
    rng = np.random.default_rng(6)
    P = random_precoder(4, 4, 1.0, rng)
    R = random_covariance(4, rng)
    vals = [kgr(P, R, s2) for s2 in (0.01, 0.1, 1.0)]
    assert vals[0] >= vals[1] >= vals[2]


def test_kgr_rank_deficient_precoder_is_finite():
    # rank-1 precoder: shared null directions must cancel, not blow up
    rng = np.random.default_rng(7)
    R = random_covariance(4, rng, trace=4.0)
    P = np.ones((4, 4), dtype=complex) / 4.0
    val = kgr(P, R, 0.1)
    assert np.isfinite(val) and val >= 0.0


def test_kgr_rejects_indefinite_covariance():
    R = np.diag([1.0, -1.0]).astype(complex)
    P = np.eye(2, dtype=complex)
    with pytest.raises(KgrNumericalError) as err:
        kgr(P, R, 1e-12)
    # the error carries the offending conditioning metric
    assert np.isfinite(err.value.metric)
    assert err.value.metric < 0


def test_kgr_rejects_nonpositive_noise():
    with pytest.raises(ValueError):
        kgr(np.eye(2), np.eye(2), 0.0)


def test_kgr_finite_at_extreme_scales():
    rng = np.random.default_rng(9)
    P = random_precoder(4, 4, 1.0, rng)
    R = random_covariance(4, rng, trace=4.0)
    low_noise = kgr(P, R, 1e-6)
    loud_channel = kgr(P, 1e4 * R, 0.1)
    assert np.isfinite(low_noise) and low_noise > 0
    assert np.isfinite(loud_channel) and loud_channel > 0
    # rate grows when either the noise shrinks or the channel strengthens
    base = kgr(P, R, 0.1)
    assert low_noise > base and loud_channel > base


def test_kgr_batch_matches_single():
    rng = np.random.default_rng(8)
    R = random_covariance(4, rng)
    stack = np.stack([random_precoder(4, 4, 1.0, rng) for _ in range(6)])
    vals, ok = kgr_batch(stack, R, 0.1)
    assert ok.all()
    for i in range(6):
        assert vals[i] == pytest.approx(kgr(stack[i], R, 0.1), abs=1e-12)


def test_kgr_batch_matches_single_on_mixed_ranks():
    # generic, rank-one and zero precoders in one batch, per-item covariances
    rng = np.random.default_rng(10)
    precoders = np.stack(
        [
            random_precoder(4, 4, 1.0, rng),
            np.ones((4, 4), dtype=complex) / 4.0,
            np.zeros((4, 4), dtype=complex),
            random_precoder(4, 4, 1.0, rng),
        ]
    )
    covs = np.stack([random_covariance(4, rng, trace=4.0) for _ in range(4)])
    vals, ok = kgr_batch(precoders, covs, 0.1)
    assert ok.all()
    for i in range(4):
        assert vals[i] == pytest.approx(kgr(precoders[i], covs[i], 0.1), abs=1e-9)
    assert vals[2] == 0.0


def test_kgr_batch_flags_failures():
    bad = np.diag([1.0, -1.0]).astype(complex)
    good = np.eye(2, dtype=complex)
    P = np.stack([np.eye(2, dtype=complex)] * 2)
    vals, ok = kgr_batch(P, np.stack([good, bad]), 1e-12)
    assert ok[0] and not ok[1]
    assert np.isnan(vals[1])
