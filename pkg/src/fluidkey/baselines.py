"""Comparison strategies: fixed-grid array with precoder-only search, and random sampling.

The fixed-position benchmark places the antennas on a regular square grid at
the minimum spacing and optimizes only the precoder.  The random strategy
draws feasible (precoder, layout) pairs independently and keeps the running
best, which bounds what unguided search achieves at the same evaluation
budget.
"""

from __future__ import annotations

import enum
import math
import time

import numpy as np

from .constraints import PenaltyConfig, project_power, spacing_penalty
from .kgr import kgr_batch
from .pso import CovarianceModel, OptTrace, PsoConfig, TraceRecord, _run_swarm, _SwarmProblem
from .scenario import PathSet, Scenario

__all__ = ["BaselineKind", "upa_layout", "run_upa_baseline", "run_random_baseline"]


class BaselineKind(enum.Enum):
    UPA_PRECODER_PSO = "upa"
    RANDOM_STRATEGY = "random"


def upa_layout(scenario: Scenario) -> np.ndarray:
    """Regular grid at pitch d_min anchored one pitch off the region corner.

    Perfect squares give a sqrt(N) x sqrt(N) grid; otherwise the most-square
    rows x cols grid with rows*cols >= N is filled row-major and the extra
    points dropped.
    """
    n = scenario.n_antennas
    d = scenario.d_min
    region = scenario.region
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    if region.x_lo + cols * d > region.x_hi or region.y_lo + rows * d > region.y_hi:
        raise ValueError(f"{rows}x{cols} grid at pitch {d} does not fit the region")
    pts = [
        (region.x_lo + d + c * d, region.y_lo + d + r * d)
        for r in range(rows)
        for c in range(cols)
    ]
    return np.asarray(pts[:n], dtype=float)


def run_upa_baseline(
    scenario: Scenario,
    paths: PathSet,
    cfg: PsoConfig,
    rng: np.random.Generator,
    penalty: PenaltyConfig | None = None,
    cov_mode: str = "analytic",
    eval_log: list | None = None,
) -> OptTrace:
    """Precoder-only swarm (2NS coordinates) with the layout frozen at the grid."""
    penalty = penalty or PenaltyConfig(d_min=scenario.d_min)
    layout = upa_layout(scenario)
    R = CovarianceModel(scenario, paths, cov_mode)(layout)
    problem = _SwarmProblem(
        scenario,
        penalty,
        cov_model=None,
        optimize_precoder=True,
        optimize_layout=False,
        fixed_layout=layout,
        fixed_covariance=R,
    )
    return _run_swarm(problem, cfg, rng, eval_log=eval_log)


def run_random_baseline(
    scenario: Scenario,
    paths: PathSet,
    n_trials: int,
    rng: np.random.Generator,
    cov_mode: str = "analytic",
    max_rejects: int = 1000,
) -> OptTrace:
    """Independent feasible samples of (precoder, layout); running-best trace.

    Layouts are rejection-sampled until the spacing constraint holds and
    precoders are projected onto the power sphere, so every trial is
    feasible.  The trace stores both the per-trial rate and the running
    maximum.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    start = time.perf_counter()
    n, s = scenario.n_antennas, scenario.n_pilots
    region = scenario.region
    cov = CovarianceModel(scenario, paths, cov_mode)

    layouts = np.empty((n_trials, n, 2))
    for i in range(n_trials):
        for attempt in range(max_rejects + 1):
            cand = np.column_stack(
                [
                    rng.uniform(region.x_lo, region.x_hi, n),
                    rng.uniform(region.y_lo, region.y_hi, n),
                ]
            )
            if spacing_penalty(cand, scenario.d_min) == 0.0:
                break
        else:
            raise RuntimeError(f"no feasible layout found in {max_rejects} rejection attempts")
        layouts[i] = cand
    precoders = np.empty((n_trials, n, s), dtype=complex)
    for i in range(n_trials):
        raw = rng.standard_normal((n, s)) + 1j * rng.standard_normal((n, s))
        precoders[i] = project_power(raw, scenario.p_max)

    trace = OptTrace()
    best = -np.inf
    best_idx = 0
    done = 0
    chunk = 512
    while done < n_trials:
        hi = min(done + chunk, n_trials)
        R = cov(layouts[done:hi])
        rate, ok = kgr_batch(precoders[done:hi], R, scenario.noise_var)
        rate = np.where(ok, rate, -np.inf)
        elapsed = (time.perf_counter() - start) * 1e3
        for i, r in enumerate(rate, start=done):
            if r > best:
                best = float(r)
                best_idx = i
            trace.records.append(
                TraceRecord(
                    iteration=i,
                    best_fitness=best,
                    best_kgr=best,
                    penalty=0.0,
                    elapsed_ms=elapsed,
                    sample_kgr=float(r),
                )
            )
        done = hi
    trace.best_precoder = precoders[best_idx].copy()
    trace.best_layout = layouts[best_idx].copy()
    return trace
