import numpy as np
import pytest

from fluidkey import (
    PgdConfig,
    PsoConfig,
    Region,
    Scenario,
    analytic_covariance,
    kgr,
    run_ao,
    stream,
    upa_layout,
)
from fluidkey.ao import pgd_precoder, pso_layout

from conftest import random_paths


def test_pgd_loss_monotone_over_random_starts():
    scen = Scenario()
    paths = random_paths(scen, seed=1)
    layout = upa_layout(scen)
    cfg = PgdConfig(max_steps=40)
    for k in range(20):
        _, trace = pgd_precoder(layout, scen, paths, cfg, stream(100 + k, "pgd"))
        losses = trace.losses
        assert all(b <= a for a, b in zip(losses, losses[1:]))


def test_pgd_iterates_stay_on_power_sphere():
    scen = Scenario()
    paths = random_paths(scen, seed=2)
    P, _ = pgd_precoder(upa_layout(scen), scen, paths, PgdConfig(max_steps=30), stream(0, "pgd"))
    assert np.sum(np.abs(P) ** 2) == pytest.approx(scen.p_max, rel=1e-9)


def test_pgd_restart_at_converged_point_is_stationary():
    scen = Scenario()
    paths = random_paths(scen, seed=3)
    layout = upa_layout(scen)
    cfg = PgdConfig(max_steps=3000, grad_tol=1e-7)
    P, _ = pgd_precoder(layout, scen, paths, cfg, stream(1, "pgd"))
    P2, trace = pgd_precoder(layout, scen, paths, cfg, stream(2, "pgd"), start=P)
    assert trace.accepted_steps == 0
    assert len(trace.losses) == 1
    assert np.array_equal(P2, P)


def test_pgd_scalar_case_matches_phase_grid_oracle():
    # N = S = 1: the whole sphere is |p|^2 = p_max and the rate is phase
    # invariant, so a grid over the phase bounds the optimum
    scen = Scenario(n_antennas=1, n_pilots=1, n_paths=4)
    paths = random_paths(scen, seed=4)
    layout = np.array([[3.0, 3.0]])
    R = analytic_covariance(layout, paths, scen.wavelength)
    P, _ = pgd_precoder(layout, scen, paths, PgdConfig(max_steps=50), stream(3, "pgd"))
    got = kgr(P, R, scen.noise_var)
    grid = max(
        kgr(np.array([[np.sqrt(scen.p_max) * np.exp(1j * a)]]), R, scen.noise_var)
        for a in np.linspace(0, 2 * np.pi, 64)
    )
    assert got == pytest.approx(grid, abs=1e-6)


def test_pgd_config_validation():
    with pytest.raises(ValueError):
        PgdConfig(step_size=0.0)
    with pytest.raises(ValueError):
        PgdConfig(backtrack_factor=1.0)
    with pytest.raises(ValueError):
        PgdConfig(grad_tol=0.0)


def test_pso_layout_single_antenna_matches_grid_search():
    scen = Scenario(n_antennas=1, n_pilots=1, n_paths=4)
    paths = random_paths(scen, seed=5)
    P = np.array([[1.0 + 0j]])
    cfg = PsoConfig(n_particles=10, max_iters=20)
    layout, trace = pso_layout(P, scen, paths, cfg, stream(4, "pso"))
    xs = np.linspace(scen.region.x_lo, scen.region.x_hi, 50)
    ys = np.linspace(scen.region.y_lo, scen.region.y_hi, 50)
    grid_best = -np.inf
    for x in xs:
        for y in ys:
            R = analytic_covariance(np.array([[x, y]]), paths, scen.wavelength)
            grid_best = max(grid_best, kgr(P, R, scen.noise_var))
    assert trace.best_kgr >= grid_best - 0.5
    assert trace.records[-1].penalty == 0.0


def test_pso_layout_degenerate_particle_stays_at_incumbent():
    scen = Scenario(n_antennas=2, n_pilots=2, n_paths=4, region=Region(0, 8, 0, 8))
    paths = random_paths(scen, seed=6)
    P = np.full((2, 2), 0.5 + 0j)
    incumbent = np.array([[1.0, 1.0], [5.0, 5.0]])
    cfg = PsoConfig(n_particles=1, max_iters=6, w_max=0.0, w_min=0.0)
    layout, trace = pso_layout(
        P, scen, paths, cfg, stream(5, "pso"), incumbent=incumbent
    )
    assert np.array_equal(layout, incumbent)
    fits = [r.best_fitness for r in trace.records]
    assert all(b >= a for a, b in zip(fits, fits[1:]))


def test_pso_layout_monotone_best():
    scen = Scenario(n_antennas=2, n_pilots=2, n_paths=4, region=Region(0, 8, 0, 8))
    paths = random_paths(scen, seed=7)
    P = np.full((2, 2), 0.5 + 0j)
    _, trace = pso_layout(P, scen, paths, PsoConfig(n_particles=6, max_iters=10), stream(6, "p"))
    fits = [r.best_fitness for r in trace.records]
    assert all(b >= a for a, b in zip(fits, fits[1:]))


def ao_setup(seed):
    scen = Scenario(n_antennas=2, n_pilots=2, n_paths=4, region=Region(0, 8, 0, 8))
    paths = random_paths(scen, seed=seed)
    pgd_cfg = PgdConfig(max_steps=40)
    pso_cfg = PsoConfig(n_particles=8, max_iters=12)
    return scen, paths, pgd_cfg, pso_cfg


def test_ao_dominates_phase_one_on_every_seed():
    for seed in range(1, 6):
        scen, paths, pgd_cfg, pso_cfg = ao_setup(seed)
        result = run_ao(scen, paths, pgd_cfg, pso_cfg, stream(seed, "ao"))
        phase1_kgr = -result.pgd_traces[0].final_loss
        assert result.best_kgr >= phase1_kgr - 1e-9


def test_ao_result_consistency():
    scen, paths, pgd_cfg, pso_cfg = ao_setup(8)
    result = run_ao(scen, paths, pgd_cfg, pso_cfg, stream(8, "ao"))
    R = analytic_covariance(result.best_layout, paths, scen.wavelength)
    assert result.best_kgr == pytest.approx(
        kgr(result.best_precoder, R, scen.noise_var), abs=1e-9
    )
    assert np.sum(np.abs(result.best_precoder) ** 2) == pytest.approx(scen.p_max, rel=1e-9)
    assert scen.region.contains(result.best_layout)


def test_ao_multi_round_kgr_non_decreasing():
    scen, paths, pgd_cfg, pso_cfg = ao_setup(9)
    result = run_ao(scen, paths, pgd_cfg, pso_cfg, stream(9, "ao"), n_rounds=3)
    assert len(result.round_kgr) == 3
    for a, b in zip(result.round_kgr, result.round_kgr[1:]):
        assert b >= a - 1e-9


def test_ao_rejects_bad_round_count():
    scen, paths, pgd_cfg, pso_cfg = ao_setup(10)
    with pytest.raises(ValueError):
        run_ao(scen, paths, pgd_cfg, pso_cfg, stream(10, "ao"), n_rounds=0)
