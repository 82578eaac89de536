"""Secret-key generation rate of the two-way probing scheme.

Both ends observe the same precoded channel x = P^T h through independent
noise: the uplink estimate has noise covariance sigma^2 P^T P* (noise passes
through the precoder) and the downlink estimate has noise covariance
sigma^2 I.  For jointly Gaussian observations the extractable key rate is the
mutual information

    R_sk = log2( det(R_a) det(R_b) / det([[R_a, R_x], [R_x, R_b]]) ),

with R_a, R_b the marginal covariances and R_x = P^T R P* the cross block.
All determinants are evaluated in the log domain through Cholesky
factorizations; a nearly singular joint block matrix is floored with a tiny
jitter, and anything worse raises `KgrNumericalError` instead of silently
returning +/-inf.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "KgrNumericalError",
    "second_order_stats",
    "kgr",
    "kgr_batch",
    "kgr_gradient",
]

_LN2 = math.log(2.0)
_LOGDET_MIN = math.log(1e-300)
_PSD_FLOOR_REL = 1e-8
_JITTER_REL = 1e-12
_NEG_CLAMP = 1e-9


class KgrNumericalError(RuntimeError):
    """Raised when the rate is numerically unevaluable.

    `metric` carries the offending conditioning number: the most negative
    relative eigenvalue for indefinite inputs, or the joint log-determinant
    when it underflows.
    """

    def __init__(self, message: str, metric: float):
        super().__init__(f"{message} (conditioning metric {metric:g})")
        self.metric = metric


def _hermitize(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + np.swapaxes(X.conj(), -1, -2))


def second_order_stats(P: np.ndarray, R: np.ndarray, noise_var: float):
    """Covariance blocks (R_a, R_b, R_cross) of the two channel estimates.

    R_a = P^T R P* + sigma^2 P^T P*   (uplink estimate, noise precoded)
    R_b = P^T R P* + sigma^2 I_S      (downlink estimate)
    R_cross = P^T R P*                (shared randomness)
    """
    P = np.asarray(P, dtype=complex)
    R = np.asarray(R, dtype=complex)
    if P.ndim != 2:
        raise ValueError("precoder must be a 2-D matrix")
    n, s = P.shape
    if R.shape != (n, n):
        raise ValueError(f"covariance shape {R.shape} does not match precoder rows {n}")
    cross = P.T @ R @ P.conj()
    r_a = cross + noise_var * (P.T @ P.conj())
    r_b = cross + noise_var * np.eye(s)
    return r_a, r_b, cross


def _joint_block(r_a: np.ndarray, r_b: np.ndarray, cross: np.ndarray) -> np.ndarray:
    top = np.concatenate([r_a, cross], axis=-1)
    bottom = np.concatenate([cross, r_b], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _try_chol_logdets(mats):
    out = []
    for H in mats:
        try:
            c = np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            return None
        out.append(float(2.0 * np.log(np.abs(np.diagonal(c))).sum()))
    return out


def _rate_from_blocks(r_a, r_b, cross) -> float:
    if not cross.any():
        # zero cross covariance: the two estimates are independent
        return 0.0
    r_a = _hermitize(r_a)
    r_b = _hermitize(r_b)
    cross = _hermitize(cross)
    joint = _joint_block(r_a, r_b, cross)
    lds = _try_chol_logdets((r_a, r_b, joint))
    if lds is None:
        # A rank-deficient precoder leaves shared null directions in R_a and
        # the joint block; one common jitter magnitude keeps their log-det
        # contributions cancelling exactly.
        for name, H in (("R_a", r_a), ("R_b", r_b), ("joint covariance", joint)):
            eig = np.linalg.eigvalsh(H)
            lam_max = float(eig.max())
            lam_min = float(eig.min())
            if lam_max <= 0 or lam_min <= -_PSD_FLOOR_REL * lam_max:
                rel = lam_min / lam_max if lam_max > 0 else lam_min
                raise KgrNumericalError(f"{name} is numerically indefinite", rel)
        eps = _JITTER_REL * float(np.trace(joint).real)
        lds = _try_chol_logdets(
            (
                r_a + eps * np.eye(r_a.shape[0]),
                r_b + eps * np.eye(r_b.shape[0]),
                joint + eps * np.eye(joint.shape[0]),
            )
        )
        if lds is None:
            raise KgrNumericalError("covariance blocks singular after regularization", eps)
    ld_a, ld_b, ld_j = lds
    if ld_j < _LOGDET_MIN:
        raise KgrNumericalError("joint covariance determinant underflows", ld_j)
    bits = (ld_a + ld_b - ld_j) / _LN2
    if bits < 0.0:
        if bits < -_NEG_CLAMP:
            raise KgrNumericalError("rate evaluated negative", bits)
        bits = 0.0
    return bits


def kgr(P: np.ndarray, R: np.ndarray, noise_var: float) -> float:
    """Key rate in bits per probe for precoder P and channel covariance R."""
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    r_a, r_b, cross = second_order_stats(P, R, noise_var)
    return _rate_from_blocks(r_a, r_b, cross)


def kgr_batch(P: np.ndarray, R: np.ndarray, noise_var: float):
    """Key rates for stacked precoders/covariances.

    P: (m, N, S), R: (m, N, N) or a single (N, N) shared covariance.
    Returns (bits, ok): failed evaluations get ok=False and bits=nan instead
    of raising, so population optimizers can keep going.
    """
    P = np.asarray(P, dtype=complex)
    R = np.asarray(R, dtype=complex)
    m, n, s = P.shape
    if R.ndim == 2:
        R = np.broadcast_to(R, (m, n, n))
    Pt = np.swapaxes(P, -1, -2)
    Pc = P.conj()
    cross = _hermitize(Pt @ R @ Pc)
    r_a = _hermitize(cross + noise_var * (Pt @ Pc))
    r_b = cross + noise_var * np.eye(s)
    joint = _joint_block(r_a, r_b, cross)

    bits = np.full(m, np.nan)
    ok = np.zeros(m, dtype=bool)
    zero = ~cross.reshape(m, -1).any(axis=1)
    bits[zero] = 0.0
    ok[zero] = True
    todo = ~zero
    if todo.any():
        try:
            ld_a = _chol_logdet_stack(r_a[todo])
            ld_b = _chol_logdet_stack(r_b[todo])
            ld_j = _chol_logdet_stack(joint[todo])
            vals = (ld_a + ld_b - ld_j) / _LN2
            good = (ld_j >= _LOGDET_MIN) & (vals >= -_NEG_CLAMP)
            vals = np.where(vals < 0.0, 0.0, vals)
            idx = np.flatnonzero(todo)
            bits[idx[good]] = vals[good]
            ok[idx[good]] = True
            failed = idx[~good]
        except np.linalg.LinAlgError:
            failed = np.flatnonzero(todo)
        for i in failed:
            try:
                bits[i] = _rate_from_blocks(r_a[i], r_b[i], cross[i])
                ok[i] = True
            except KgrNumericalError:
                pass
    return bits, ok


def _chol_logdet_stack(H: np.ndarray) -> np.ndarray:
    c = np.linalg.cholesky(H)
    return 2.0 * np.log(np.abs(np.diagonal(c, axis1=-2, axis2=-1))).sum(axis=-1)


def kgr_gradient(
    P: np.ndarray, R: np.ndarray, noise_var: float, unit: str = "bits"
) -> np.ndarray:
    """Gradient of the negative key rate with respect to the precoder.

    The rate is differentiated in the real parameterization [Re P; Im P] and
    the two real blocks are packed back as the complex matrix
    d(-R_sk)/dRe(P) + j d(-R_sk)/dIm(P), so for any complex direction D the
    directional derivative of -R_sk equals Re(sum(conj(grad) * D)).
    """
    if unit not in ("bits", "nats"):
        raise ValueError("unit must be 'bits' or 'nats'")
    P = np.asarray(P, dtype=complex)
    R = np.asarray(R, dtype=complex)
    n, s = P.shape
    if R.shape != (n, n):
        raise ValueError("covariance shape does not match precoder rows")
    M = R + noise_var * np.eye(n)
    Pc = P.conj()
    cross = _hermitize(P.T @ R @ Pc)
    r_a = _hermitize(P.T @ M @ Pc)
    r_b = cross + noise_var * np.eye(s)
    joint = _joint_block(r_a, r_b, cross)
    try:
        a_inv = np.linalg.inv(r_a)
        b_inv = np.linalg.inv(r_b)
        j_inv = np.linalg.inv(joint)
    except np.linalg.LinAlgError:
        raise KgrNumericalError("covariance blocks are singular in the gradient", 0.0) from None
    j11 = j_inv[:s, :s]
    j12 = j_inv[:s, s:]
    j21 = j_inv[s:, :s]
    j22 = j_inv[s:, s:]
    # d(ln det)/dP holding P* fixed; the joint term collects all four blocks
    g_holo = M @ Pc @ a_inv + R @ Pc @ b_inv - (M @ Pc @ j11 + R @ Pc @ (j12 + j21 + j22))
    grad = -2.0 * g_holo.conj()
    if unit == "bits":
        grad = grad / _LN2
    if not np.isfinite(grad).all():
        raise KgrNumericalError("gradient has non-finite entries", float("nan"))
    return grad
