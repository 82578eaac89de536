"""Alternating optimization: gradient descent on the precoder, swarm on the layout.

Phase 1 fixes the antenna layout (the regular grid by default), treats the
channel covariance as a constant, and minimizes the negative key rate over
the precoder with projected gradient descent; a backtracking line search
keeps the loss trace monotone.  Phase 2 freezes the resulting precoder and
runs the particle swarm over the 2N layout coordinates only, with one
particle seeded at the incumbent layout so the alternation can never lose
ground.  Optionally the two phases repeat for several rounds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import upa_layout
from .constraints import PenaltyConfig, project_power
from .kgr import KgrNumericalError, kgr, kgr_gradient
from .pso import CovarianceModel, OptTrace, PsoConfig, _run_swarm, _SwarmProblem
from .scenario import PathSet, Scenario

__all__ = ["PgdConfig", "PgdTrace", "AoResult", "pgd_precoder", "pso_layout", "run_ao"]

# phase-2 swarm is deliberately smaller than the joint search (cost argument)
AO_PSO_DEFAULTS = PsoConfig(n_particles=30, max_iters=150)


@dataclass(frozen=True)
class PgdConfig:
    max_steps: int = 100
    step_size: float = 0.1
    backtrack_factor: float = 0.5
    max_halvings: int = 20
    grad_tol: float = 1e-6

    def __post_init__(self):
        if self.max_steps < 1 or self.step_size <= 0 or self.max_halvings < 1:
            raise ValueError("max_steps, step_size and max_halvings must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtracking factor must lie in (0, 1)")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")


@dataclass
class PgdTrace:
    losses: list[float] = field(default_factory=list)
    tangent_norms: list[float] = field(default_factory=list)
    accepted_steps: int = 0

    @property
    def final_loss(self) -> float:
        return self.losses[-1]

    @property
    def final_tangent_norm(self) -> float:
        return self.tangent_norms[-1] if self.tangent_norms else float("nan")


def _tangent_component(grad: np.ndarray, P: np.ndarray, p_max: float) -> np.ndarray:
    # tangent space of the power sphere in the real parameterization
    radial = float(np.sum(grad.real * P.real + grad.imag * P.imag)) / p_max
    return grad - radial * P


def pgd_precoder(
    layout: np.ndarray,
    scenario: Scenario,
    paths: PathSet,
    cfg: PgdConfig,
    rng: np.random.Generator,
    cov_mode: str = "analytic",
    start: np.ndarray | None = None,
):
    """Projected gradient descent on the precoder for a fixed layout.

    Returns the final precoder and a loss trace that is non-increasing by
    construction.  Stops after `max_steps` accepted steps, when the
    sphere-tangent gradient norm drops below `grad_tol`, or when the line
    search cannot find a non-increasing step.
    """
    n, s = scenario.n_antennas, scenario.n_pilots
    R = CovarianceModel(scenario, paths, cov_mode)(np.asarray(layout, dtype=float))
    if start is None:
        P = rng.standard_normal((n, s)) + 1j * rng.standard_normal((n, s))
    else:
        P = np.asarray(start, dtype=complex)
    P = project_power(P, scenario.p_max)

    trace = PgdTrace()
    loss = -kgr(P, R, scenario.noise_var)
    trace.losses.append(loss)
    for step in range(cfg.max_steps):
        try:
            grad = kgr_gradient(P, R, scenario.noise_var)
        except KgrNumericalError:
            if step == 0:
                raise
            break
        tangent_norm = float(np.linalg.norm(_tangent_component(grad, P, scenario.p_max)))
        trace.tangent_norms.append(tangent_norm)
        if tangent_norm < cfg.grad_tol:
            break
        eta = cfg.step_size
        accepted = False
        for _ in range(cfg.max_halvings + 1):
            candidate = project_power(P - eta * grad, scenario.p_max)
            try:
                cand_loss = -kgr(candidate, R, scenario.noise_var)
            except KgrNumericalError:
                cand_loss = np.inf  # reject and keep halving
            if cand_loss <= loss:
                accepted = True
                break
            eta *= cfg.backtrack_factor
        if not accepted:
            break
        P, loss = candidate, cand_loss
        trace.losses.append(loss)
        trace.accepted_steps += 1
    return P, trace


def pso_layout(
    fixed_precoder: np.ndarray,
    scenario: Scenario,
    paths: PathSet,
    cfg: PsoConfig,
    rng: np.random.Generator,
    penalty: PenaltyConfig | None = None,
    cov_mode: str = "analytic",
    incumbent: np.ndarray | None = None,
    eval_log: list | None = None,
):
    """Swarm over the 2N layout coordinates with the precoder frozen."""
    penalty = penalty or PenaltyConfig(d_min=scenario.d_min)
    problem = _SwarmProblem(
        scenario,
        penalty,
        CovarianceModel(scenario, paths, cov_mode),
        optimize_precoder=False,
        optimize_layout=True,
        fixed_precoder=np.asarray(fixed_precoder, dtype=complex),
    )
    incumbent_vec = None if incumbent is None else np.asarray(incumbent, float).ravel()
    trace = _run_swarm(problem, cfg, rng, incumbent=incumbent_vec, eval_log=eval_log)
    return trace.best_layout, trace


@dataclass
class AoResult:
    best_precoder: np.ndarray
    best_layout: np.ndarray
    best_kgr: float
    pgd_traces: list[PgdTrace]
    pso_traces: list[OptTrace]
    round_kgr: list[float]
    elapsed_ms: float

    @property
    def pgd_trace(self) -> PgdTrace:
        return self.pgd_traces[-1]

    @property
    def pso_trace(self) -> OptTrace:
        return self.pso_traces[-1]


def run_ao(
    scenario: Scenario,
    paths: PathSet,
    pgd_cfg: PgdConfig,
    pso_cfg: PsoConfig,
    rng: np.random.Generator,
    n_rounds: int = 1,
    penalty: PenaltyConfig | None = None,
    cov_mode: str = "analytic",
) -> AoResult:
    """Alternate precoder descent and layout swarm starting from the grid layout.

    Each round starts both phases from the incumbent, so the per-round best
    key rate is non-decreasing.
    """
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    start = time.perf_counter()
    penalty = penalty or PenaltyConfig(d_min=scenario.d_min)
    cov = CovarianceModel(scenario, paths, cov_mode)
    layout = upa_layout(scenario)
    precoder = None
    pgd_traces: list[PgdTrace] = []
    pso_traces: list[OptTrace] = []
    round_kgr: list[float] = []
    for _ in range(n_rounds):
        precoder, ptrace = pgd_precoder(
            layout, scenario, paths, pgd_cfg, rng, cov_mode=cov_mode, start=precoder
        )
        pgd_traces.append(ptrace)
        layout, strace = pso_layout(
            precoder,
            scenario,
            paths,
            pso_cfg,
            rng,
            penalty=penalty,
            cov_mode=cov_mode,
            incumbent=layout,
        )
        pso_traces.append(strace)
        round_kgr.append(float(kgr(precoder, cov(layout), scenario.noise_var)))
    best_kgr = float(kgr(precoder, cov(layout), scenario.noise_var))
    return AoResult(
        best_precoder=precoder,
        best_layout=layout,
        best_kgr=best_kgr,
        pgd_traces=pgd_traces,
        pso_traces=pso_traces,
        round_kgr=round_kgr,
        elapsed_ms=(time.perf_counter() - start) * 1e3,
    )
