"""Physical scenario description: constants, propagation paths, antenna layouts.

A `Scenario` collects every constant of one experiment (array size, pilot
length, power budget, noise, movable region).  A `PathSet` is one realization
of the multipath environment: L planar direction vectors with per-path gain
variances.  Antenna layouts are plain (N, 2) float arrays of positions in
meters; they are only valid inside the scenario's rectangular region.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Region", "Scenario", "PathSet", "sample_paths", "path_directions"]


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle [x_lo, x_hi] x [y_lo, y_hi] in meters."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_hi > self.x_lo and self.y_hi > self.y_lo):
            raise ValueError("region sides must have positive length")

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def height(self) -> float:
        return self.y_hi - self.y_lo

    def contains(self, positions: np.ndarray, atol: float = 0.0) -> bool:
        p = np.asarray(positions, dtype=float).reshape(-1, 2)
        return bool(
            (p[:, 0] >= self.x_lo - atol).all()
            and (p[:, 0] <= self.x_hi + atol).all()
            and (p[:, 1] >= self.y_lo - atol).all()
            and (p[:, 1] <= self.y_hi + atol).all()
        )


@dataclass(frozen=True)
class Scenario:
    """All physical and experimental constants of one simulation.

    Parameters
    ----------
    n_antennas : number of movable antennas N.
    n_pilots : pilot length S (precoding matrix is N x S).
    n_paths : number of propagation paths L.
    wavelength : carrier wavelength in meters.
    p_max : total transmit power; the precoder lives on Tr(P P^H) = p_max.
    noise_var : per-element noise variance at both ends.
    d_min : minimum pairwise antenna spacing in meters.
    region : movable region for antenna positions.
    mc_samples : Monte-Carlo sample count for the sampled covariance.
    seed : base seed; all random streams of a run derive from it.
    """

    n_antennas: int = 4
    n_pilots: int = 4
    n_paths: int = 8
    wavelength: float = 1.0
    p_max: float = 1.0
    noise_var: float = 0.1
    d_min: float = 0.5
    region: Region = field(default_factory=lambda: Region(0.0, 20.0, 0.0, 20.0))
    mc_samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        for name in ("n_antennas", "n_pilots", "n_paths", "mc_samples"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("wavelength", "p_max", "noise_var", "d_min"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        # Feasibility heuristic: a square grid at pitch d_min must be able to
        # hold all N antennas inside the region.
        slots = (math.floor(self.region.width / self.d_min) + 1) * (
            math.floor(self.region.height / self.d_min) + 1
        )
        if slots < self.n_antennas:
            raise ValueError(
                f"region cannot hold {self.n_antennas} antennas at spacing {self.d_min}"
            )


def path_directions(elevations: np.ndarray, azimuths: np.ndarray) -> np.ndarray:
    """Planar direction vectors [sin(theta) cos(phi), cos(theta)] per path.

    These are the 2-D projections of 3-D unit vectors, so their norm is <= 1.
    """
    theta = np.asarray(elevations, dtype=float)
    phi = np.asarray(azimuths, dtype=float)
    return np.stack([np.sin(theta) * np.cos(phi), np.cos(theta)], axis=-1)


@dataclass(frozen=True)
class PathSet:
    """One realization of the L-path propagation environment.

    `directions` is always recomputed from the angles; `gain_vars` are the
    per-path gain variances and must sum to the total channel power.
    """

    elevations: np.ndarray
    azimuths: np.ndarray
    gain_vars: np.ndarray
    seed: int | None = None
    directions: np.ndarray = field(init=False)

    def __post_init__(self):
        elev = np.atleast_1d(np.asarray(self.elevations, dtype=float))
        azim = np.atleast_1d(np.asarray(self.azimuths, dtype=float))
        gains = np.atleast_1d(np.asarray(self.gain_vars, dtype=float))
        if not (elev.shape == azim.shape == gains.shape):
            raise ValueError("elevations, azimuths, gain_vars must have equal length")
        if (gains <= 0).any():
            raise ValueError("gain variances must be positive")
        object.__setattr__(self, "elevations", elev)
        object.__setattr__(self, "azimuths", azim)
        object.__setattr__(self, "gain_vars", gains)
        object.__setattr__(self, "directions", path_directions(elev, azim))

    @property
    def n_paths(self) -> int:
        return len(self.gain_vars)

    @property
    def total_power(self) -> float:
        return float(self.gain_vars.sum())

    def to_json(self) -> str:
        payload = {
            "elevations": self.elevations.tolist(),
            "azimuths": self.azimuths.tolist(),
            "gain_vars": self.gain_vars.tolist(),
            "seed": self.seed,
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "PathSet":
        payload = json.loads(text)
        return cls(
            elevations=np.array(payload["elevations"]),
            azimuths=np.array(payload["azimuths"]),
            gain_vars=np.array(payload["gain_vars"]),
            seed=payload.get("seed"),
        )


def sample_paths(
    scenario: Scenario, rng: np.random.Generator, total_power: float = 1.0
) -> PathSet:
    """Draw a quasi-static propagation environment.

    Elevation and azimuth angles are i.i.d. uniform on [0, pi]; the total
    channel power is split equally over the L paths.  The environment is
    sampled once per scenario seed and held fixed for a whole optimization
    run.
    """
    L = scenario.n_paths
    theta = rng.uniform(0.0, np.pi, size=L)
    phi = rng.uniform(0.0, np.pi, size=L)
    gains = np.full(L, total_power / L)
    return PathSet(elevations=theta, azimuths=phi, gain_vars=gains, seed=scenario.seed)
