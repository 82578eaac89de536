"""Jointly optimize the precoder and the antenna layout with the particle swarm.

Each particle packs [Re P, Im P, x_1, y_1, ..., x_N, y_N]; after every
velocity step the precoder block is rescaled onto the power sphere and the
layout block is clamped to the region, and spacing violations are penalized
rather than forced.  The global best is monotone by construction.

    python demos/03_joint_swarm.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fluidkey import PsoConfig, Scenario, run_pso, sample_paths, spacing_penalty, stream, upa_layout

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

scen = Scenario()
paths = sample_paths(scen, stream(scen.seed, "paths"))
cfg = PsoConfig(n_particles=50, max_iters=200)

trace = run_pso(scen, paths, cfg, stream(scen.seed, "pso"))
print(f"converged rate: {trace.best_kgr:.4f} bits after {trace.iterations} iterations")
print(f"spacing penalty at the best layout: {trace.records[-1].penalty:.3g}")
print(f"precoder power: {np.sum(np.abs(trace.best_precoder)**2):.9f} (budget {scen.p_max})")
print("best layout (m):")
print(np.round(trace.best_layout, 3))
print(f"pairwise spacing ok: {spacing_penalty(trace.best_layout, scen.d_min) == 0.0}")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
ax1.plot([r.iteration for r in trace.records], [r.best_kgr for r in trace.records])
ax1.set_xlabel("iteration")
ax1.set_ylabel("best key rate (bits)")
upa = upa_layout(scen)
ax2.scatter(upa[:, 0], upa[:, 1], marker="o", label="grid start")
ax2.scatter(trace.best_layout[:, 0], trace.best_layout[:, 1], marker="^", label="optimized")
ax2.set_xlim(scen.region.x_lo, scen.region.x_hi)
ax2.set_ylim(scen.region.y_lo, scen.region.y_hi)
ax2.set_aspect("equal")
ax2.legend()
fig.tight_layout()
fig.savefig(OUT / "joint_swarm.png", dpi=120)
print(f"wrote {OUT / 'joint_swarm.png'}")
