"""Particle-swarm optimization of the key rate.

The joint search space concatenates the real part of the precoder, its
imaginary part, and the flattened antenna layout (2NS + 2N coordinates).
After every velocity step each particle is repaired: the precoder block is
rescaled onto the power sphere and the layout block is clamped into the
movable region.  Personal and global bests advance only on strict
improvement, and the best-update reduction happens once per iteration in
particle order, so a run is reproducible no matter how the fitness
evaluations are scheduled.

The same engine also serves the two restricted searches used elsewhere:
precoder-only (fixed layout) and layout-only (fixed precoder).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .channel import analytic_covariance, sample_gains, steering_matrix
from .constraints import PenaltyConfig, clamp_region, spacing_penalty
from .kgr import kgr_batch
from .rng import stream
from .scenario import PathSet, Scenario

__all__ = [
    "PsoConfig",
    "TraceRecord",
    "OptTrace",
    "CovarianceModel",
    "encode",
    "decode",
    "inertia_weight",
    "PsoState",
    "pso_step",
    "run_pso",
]


@dataclass(frozen=True)
class PsoConfig:
    n_particles: int = 50
    max_iters: int = 200
    c1: float = 1.5
    c2: float = 1.5
    w_max: float = 0.9
    w_min: float = 0.4
    v_max: float | None = None  # absolute clamp; None means 10% of each dimension's range

    def __post_init__(self):
        if self.n_particles < 1 or self.max_iters < 0:
            raise ValueError("n_particles must be >= 1 and max_iters >= 0")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("c1 and c2 must be positive")
        if self.w_max < self.w_min:
            raise ValueError("w_max must be >= w_min")
        if self.v_max is not None and self.v_max <= 0:
            raise ValueError("v_max must be positive when given")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    best_fitness: float
    best_kgr: float
    penalty: float
    elapsed_ms: float
    sample_kgr: float | None = None  # per-trial value; only the random baseline fills this


@dataclass
class OptTrace:
    """Per-iteration global-best history plus the decoded final optimum."""

    records: list[TraceRecord] = field(default_factory=list)
    best_precoder: np.ndarray | None = None
    best_layout: np.ndarray | None = None

    @property
    def best_fitness(self) -> float:
        return self.records[-1].best_fitness

    @property
    def best_kgr(self) -> float:
        return self.records[-1].best_kgr

    @property
    def iterations(self) -> int:
        return self.records[-1].iteration

    @property
    def elapsed_ms(self) -> float:
        return self.records[-1].elapsed_ms


def encode(P: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Pack (P, layout) as [Re P, Im P, x_1, y_1, ..., x_N, y_N]."""
    P = np.asarray(P)
    pos = np.asarray(positions, dtype=float)
    return np.concatenate([P.real.ravel(), P.imag.ravel(), pos.ravel()])


def decode(v: np.ndarray, n_antennas: int, n_pilots: int):
    """Inverse of `encode`; errors on a length mismatch."""
    v = np.asarray(v, dtype=float)
    ns = n_antennas * n_pilots
    want = 2 * ns + 2 * n_antennas
    if v.shape != (want,):
        raise ValueError(f"expected a vector of length {want}, got {v.shape}")
    P = (v[:ns] + 1j * v[ns : 2 * ns]).reshape(n_antennas, n_pilots)
    positions = v[2 * ns :].reshape(n_antennas, 2)
    return P, positions


def inertia_weight(t: int, cfg: PsoConfig) -> float:
    """Linearly decreasing inertia: w_max at t=0 down to w_min at t=max_iters."""
    if not 0 <= t <= cfg.max_iters:
        raise ValueError("iteration index out of range")
    if t == 0:
        return cfg.w_max
    return cfg.w_max - (cfg.w_max - cfg.w_min) * t / cfg.max_iters


class CovarianceModel:
    """Maps a stack of layouts to channel covariances.

    `analytic` uses the closed form.  `monte_carlo` averages over a fixed set
    of gain draws (common random numbers derived from the scenario seed), so
    the fitness stays a deterministic function of the layout and the run cost
    scales with the sample count.
    """

    def __init__(self, scenario: Scenario, paths: PathSet, mode: str = "analytic"):
        if mode not in ("analytic", "monte_carlo"):
            raise ValueError("covariance mode must be 'analytic' or 'monte_carlo'")
        self.scenario = scenario
        self.paths = paths
        self.mode = mode
        if mode == "monte_carlo":
            rng = stream(scenario.seed, "mc-cov-gains")
            self._gains = sample_gains(paths, scenario.mc_samples, rng)

    def __call__(self, positions: np.ndarray) -> np.ndarray:
        if self.mode == "analytic":
            return analytic_covariance(positions, self.paths, self.scenario.wavelength)
        a = steering_matrix(positions, self.paths, self.scenario.wavelength)
        h = a @ self._gains.T  # (..., N, n_samples)
        R = (h @ np.swapaxes(h.conj(), -1, -2)) / self._gains.shape[0]
        return 0.5 * (R + np.swapaxes(R.conj(), -1, -2))


class _SwarmProblem:
    """Adapter between the generic swarm engine and one search space.

    Exactly one of the three variants is active: joint (precoder + layout),
    precoder-only (frozen layout), layout-only (frozen precoder).
    """

    def __init__(
        self,
        scenario: Scenario,
        penalty: PenaltyConfig,
        cov_model: CovarianceModel | None,
        optimize_precoder: bool = True,
        optimize_layout: bool = True,
        fixed_precoder: np.ndarray | None = None,
        fixed_layout: np.ndarray | None = None,
        fixed_covariance: np.ndarray | None = None,
    ):
        self.scenario = scenario
        self.penalty = penalty
        self.cov_model = cov_model
        self.opt_p = optimize_precoder
        self.opt_t = optimize_layout
        self.fixed_precoder = fixed_precoder
        self.fixed_layout = None if fixed_layout is None else np.asarray(fixed_layout, float)
        self.fixed_covariance = fixed_covariance
        n, s = scenario.n_antennas, scenario.n_pilots
        self._ns = n * s
        spans = []
        if self.opt_p:
            spans.append(np.full(2 * self._ns, 2.0 * np.sqrt(scenario.p_max)))
        if self.opt_t:
            spans.append(np.tile([scenario.region.width, scenario.region.height], n))
        self.span = np.concatenate(spans)
        self.dim = len(self.span)
        if self.opt_t and self.fixed_layout is None:
            self._fixed_pen = None
        else:
            base = self.fixed_layout if self.fixed_layout is not None else np.zeros((n, 2))
            self._fixed_pen = spacing_penalty(base, penalty.d_min)

    # --- packing -----------------------------------------------------------
    def split(self, X: np.ndarray):
        """(m, dim) -> precoder stack (m, N, S) and layout stack (m, N, 2)."""
        m = X.shape[0]
        n, s = self.scenario.n_antennas, self.scenario.n_pilots
        if self.opt_p:
            P = (X[:, : self._ns] + 1j * X[:, self._ns : 2 * self._ns]).reshape(m, n, s)
            off = 2 * self._ns
        else:
            P = np.broadcast_to(self.fixed_precoder, (m, n, s))
            off = 0
        if self.opt_t:
            T = X[:, off:].reshape(m, n, 2)
        else:
            T = np.broadcast_to(self.fixed_layout, (m, n, 2))
        return P, T

    def join(self, P: np.ndarray, T: np.ndarray) -> np.ndarray:
        m = P.shape[0]
        parts = []
        if self.opt_p:
            parts.extend([P.real.reshape(m, -1), P.imag.reshape(m, -1)])
        if self.opt_t:
            parts.append(T.reshape(m, -1))
        return np.concatenate(parts, axis=1)

    # --- engine hooks ------------------------------------------------------
    def init_positions(self, rng: np.random.Generator, m: int) -> np.ndarray:
        n, s = self.scenario.n_antennas, self.scenario.n_pilots
        region = self.scenario.region
        parts = []
        if self.opt_p:
            P = rng.standard_normal((m, n, s)) + 1j * rng.standard_normal((m, n, s))
            parts.extend([P.real.reshape(m, -1), P.imag.reshape(m, -1)])
        if self.opt_t:
            layouts = np.empty((m, n, 2))
            for i in range(m):
                # resample toward pairwise feasibility; fall back to a
                # penalized infeasible start after the retry budget
                for _ in range(100):
                    cand = np.column_stack(
                        [
                            rng.uniform(region.x_lo, region.x_hi, n),
                            rng.uniform(region.y_lo, region.y_hi, n),
                        ]
                    )
                    if spacing_penalty(cand, self.penalty.d_min) == 0.0:
                        break
                layouts[i] = cand
            parts.append(layouts.reshape(m, -1))
        return self.repair(np.concatenate(parts, axis=1))

    def repair(self, X: np.ndarray) -> np.ndarray:
        """Project precoder blocks onto the power sphere, clamp layout blocks."""
        X = np.asarray(X, dtype=float)
        P, T = self.split(X)
        if self.opt_p:
            m, n, s = P.shape
            power = (P.real**2 + P.imag**2).sum(axis=(1, 2))
            dead = power <= 0.0
            if dead.any():
                # measure-zero event: restart those precoders at a uniform point
                P = P.copy()
                P[dead] = np.sqrt(self.scenario.p_max / (n * s))
                power[dead] = self.scenario.p_max
            P = P * np.sqrt(self.scenario.p_max / power)[:, None, None]
        if self.opt_t:
            T = clamp_region(T, self.scenario.region)
        return self.join(P, T)

    def evaluate(self, X: np.ndarray):
        """Fitness, raw rate and penalty for every particle (batched)."""
        P, T = self.split(X)
        if self.fixed_covariance is not None:
            R = self.fixed_covariance
        else:
            R = self.cov_model(T)
        rate, ok = kgr_batch(P, R, self.scenario.noise_var)
        if self.opt_t:
            diff = T[:, :, None, :] - T[:, None, :, :]
            dist = np.sqrt((diff**2).sum(axis=-1))
            iu = np.triu_indices(T.shape[1], k=1)
            hinge = np.maximum(self.penalty.d_min - dist[:, iu[0], iu[1]], 0.0)
            pen = (hinge**2).sum(axis=1)
        else:
            pen = np.full(X.shape[0], self._fixed_pen)
        fitness = np.where(ok, rate - self.penalty.coefficient * pen, -np.inf)
        return fitness, rate, pen


@dataclass
class PsoState:
    problem: _SwarmProblem
    cfg: PsoConfig
    X: np.ndarray
    V: np.ndarray
    pbest: np.ndarray
    pbest_fit: np.ndarray
    gbest: np.ndarray
    gbest_fit: float
    gbest_kgr: float
    gbest_pen: float
    iteration: int = 0
    v_clamp: np.ndarray | None = None
    eval_log: list | None = None

    def _reduce_bests(self, fit, rate, pen):
        improved = fit > self.pbest_fit
        self.pbest[improved] = self.X[improved]
        self.pbest_fit[improved] = fit[improved]
        i = int(np.argmax(self.pbest_fit))
        if self.pbest_fit[i] > self.gbest_fit:
            self.gbest_fit = float(self.pbest_fit[i])
            self.gbest = self.pbest[i].copy()
            # raw parts of the new global best come from this iteration
            # unless the best is an older personal best; recompute then
            if improved[i] or self.iteration == 0:
                self.gbest_kgr = float(rate[i])
                self.gbest_pen = float(pen[i])
            else:
                f, r, p = self.problem.evaluate(self.gbest[None, :])
                self.gbest_kgr = float(r[0])
                self.gbest_pen = float(p[0])


def init_state(
    problem: _SwarmProblem,
    cfg: PsoConfig,
    rng: np.random.Generator,
    incumbent: np.ndarray | None = None,
    eval_log: list | None = None,
) -> PsoState:
    m = cfg.n_particles
    X = problem.init_positions(rng, m)
    if incumbent is not None:
        X = X.copy()
        X[0] = problem.repair(incumbent[None, :])[0]
    v_clamp = np.full(problem.dim, cfg.v_max) if cfg.v_max is not None else 0.1 * problem.span
    V = rng.uniform(-1.0, 1.0, size=(m, problem.dim)) * v_clamp
    fit, rate, pen = problem.evaluate(X)
    if eval_log is not None:
        eval_log.append(fit.copy())
    state = PsoState(
        problem=problem,
        cfg=cfg,
        X=X,
        V=V,
        pbest=X.copy(),
        pbest_fit=fit.copy(),
        gbest=np.zeros(problem.dim),
        gbest_fit=-np.inf,
        gbest_kgr=float("nan"),
        gbest_pen=float("nan"),
        v_clamp=v_clamp,
        eval_log=eval_log,
    )
    state._reduce_bests(fit, rate, pen)
    return state


def pso_step(state: PsoState, rng: np.random.Generator) -> PsoState:
    """Advance the swarm by one synchronous iteration."""
    cfg = state.cfg
    state.iteration += 1
    w = inertia_weight(state.iteration, cfg)
    m, dim = state.X.shape
    r1 = rng.random((m, dim))
    r2 = rng.random((m, dim))
    state.V = (
        w * state.V
        + cfg.c1 * r1 * (state.pbest - state.X)
        + cfg.c2 * r2 * (state.gbest - state.X)
    )
    np.clip(state.V, -state.v_clamp, state.v_clamp, out=state.V)
    state.X = state.problem.repair(state.X + state.V)
    fit, rate, pen = state.problem.evaluate(state.X)
    if state.eval_log is not None:
        state.eval_log.append(fit.copy())
    state._reduce_bests(fit, rate, pen)
    return state


def _run_swarm(
    problem: _SwarmProblem,
    cfg: PsoConfig,
    rng: np.random.Generator,
    incumbent: np.ndarray | None = None,
    eval_log: list | None = None,
) -> OptTrace:
    start = time.perf_counter()
    state = init_state(problem, cfg, rng, incumbent=incumbent, eval_log=eval_log)
    trace = OptTrace()

    def record():
        trace.records.append(
            TraceRecord(
                iteration=state.iteration,
                best_fitness=state.gbest_fit,
                best_kgr=state.gbest_kgr,
                penalty=state.gbest_pen,
                elapsed_ms=(time.perf_counter() - start) * 1e3,
            )
        )

    record()
    for _ in range(cfg.max_iters):
        pso_step(state, rng)
        record()
    P, T = problem.split(state.gbest[None, :])
    trace.best_precoder = P[0].copy()
    trace.best_layout = T[0].copy()
    return trace


def run_pso(
    scenario: Scenario,
    paths: PathSet,
    cfg: PsoConfig,
    rng: np.random.Generator,
    penalty: PenaltyConfig | None = None,
    cov_mode: str = "analytic",
    eval_log: list | None = None,
) -> OptTrace:
    """Jointly optimize precoder and antenna layout (full search space)."""
    penalty = penalty or PenaltyConfig(d_min=scenario.d_min)
    problem = _SwarmProblem(
        scenario,
        penalty,
        CovarianceModel(scenario, paths, cov_mode),
        optimize_precoder=True,
        optimize_layout=True,
    )
    return _run_swarm(problem, cfg, rng, eval_log=eval_log)
