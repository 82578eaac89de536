"""Constraint handling shared by all optimizers.

Power: the precoder is kept on the sphere Tr(P P^H) = p_max by normalized
rescaling.  Spacing: pairwise antenna distances below d_min are penalized by
a quadratic hinge instead of being forced, which keeps the fitness landscape
finite for population methods.  Region: positions are clamped to the movable
rectangle coordinate-wise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kgr import KgrNumericalError, kgr
from .scenario import Region

__all__ = [
    "PenaltyConfig",
    "FitnessValue",
    "project_power",
    "spacing_penalty",
    "clamp_region",
    "penalized_fitness",
]


@dataclass(frozen=True)
class PenaltyConfig:
    """Weight of the spacing penalty and the minimum distance it enforces.

    Deliberately separate from the Scenario so the penalty weight can never
    be confused with the carrier wavelength: the weight lives here, the
    wavelength there.
    """

    coefficient: float = 100.0
    d_min: float = 0.5

    def __post_init__(self):
        if self.coefficient < 0:
            raise ValueError("penalty coefficient must be nonnegative")
        if self.d_min <= 0:
            raise ValueError("d_min must be positive")


@dataclass(frozen=True)
class FitnessValue:
    """Penalized objective with its raw parts kept for diagnostics."""

    raw_kgr: float
    penalty: float
    fitness: float
    error: str | None = None

    @classmethod
    def from_parts(cls, raw_kgr: float, penalty: float, coefficient: float) -> "FitnessValue":
        return cls(raw_kgr=raw_kgr, penalty=penalty, fitness=raw_kgr - coefficient * penalty)


def project_power(P: np.ndarray, p_max: float) -> np.ndarray:
    """Rescale P onto the power sphere Tr(P P^H) = p_max.

    The constraint is an equality, so this projects onto the sphere rather
    than the ball; the rate is monotone in power, hence nothing is lost.
    """
    P = np.asarray(P, dtype=complex)
    power = float(np.sum(P.real**2 + P.imag**2))
    if power <= 0.0:
        raise ValueError("cannot project the zero precoder onto the power sphere")
    return P * np.sqrt(p_max / power)


def spacing_penalty(positions: np.ndarray, d_min: float) -> float:
    """Sum over antenna pairs of max(d_min - distance, 0)^2."""
    p = np.asarray(positions, dtype=float)
    n = p.shape[0]
    if n < 2:
        return 0.0
    diff = p[:, None, :] - p[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    iu = np.triu_indices(n, k=1)
    hinge = np.maximum(d_min - dist[iu], 0.0)
    return float((hinge**2).sum())


def clamp_region(positions: np.ndarray, region: Region) -> np.ndarray:
    """Clamp each coordinate into the region; idempotent."""
    p = np.array(positions, dtype=float, copy=True)
    p[..., 0] = np.clip(p[..., 0], region.x_lo, region.x_hi)
    p[..., 1] = np.clip(p[..., 1], region.y_lo, region.y_hi)
    return p


def penalized_fitness(
    P: np.ndarray,
    positions: np.ndarray,
    R: np.ndarray,
    noise_var: float,
    cfg: PenaltyConfig,
) -> FitnessValue:
    """Key rate minus the weighted spacing penalty.

    A numerically unevaluable rate becomes fitness -inf with the cause
    recorded, so a swarm simply discards the particle's position instead of
    aborting the run.
    """
    pen = spacing_penalty(positions, cfg.d_min)
    try:
        rate = kgr(P, R, noise_var)
    except KgrNumericalError as exc:
        return FitnessValue(raw_kgr=float("nan"), penalty=pen, fitness=float("-inf"), error=str(exc))
    return FitnessValue.from_parts(rate, pen, cfg.coefficient)
