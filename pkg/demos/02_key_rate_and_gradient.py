"""Evaluate the key rate, check it against the scalar formula, and probe its gradient.

The rate is the mutual information of the two precoded channel estimates.
For one antenna and one pilot it reduces to the textbook scalar form
-log2(1 - |rho|^2); in general the analytic precoder gradient agrees with
central finite differences to many digits.

    python demos/02_key_rate_and_gradient.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fluidkey import (
    Scenario,
    analytic_covariance,
    kgr,
    kgr_gradient,
    project_power,
    sample_paths,
    second_order_stats,
    stream,
    upa_layout,
)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# ---------------------------------------------------------------------------
# Worked scalar example: P=1, R=1, sigma^2=0.1.
value = kgr(np.array([[1.0]]), np.array([[1.0]]), 0.1)
print(f"scalar rate: {value:.6f} bits  (closed form log2(1.21/0.21) = {np.log2(1.21/0.21):.6f})")

r_a, r_b, cross = second_order_stats(np.array([[1.0]]), np.array([[1.0]]), 0.1)
print(f"second-order blocks: R_a={r_a[0,0]:.2f}, R_b={r_b[0,0]:.2f}, cross={cross[0,0]:.2f}")

# ---------------------------------------------------------------------------
# Full-size evaluation on the grid layout with a random power-feasible precoder.
scen = Scenario()
paths = sample_paths(scen, stream(scen.seed, "paths"))
R = analytic_covariance(upa_layout(scen), paths, scen.wavelength)
rng = stream(scen.seed, "precoder")
P = project_power(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)), scen.p_max)
print(f"\nrate at a random precoder on the grid: {kgr(P, R, scen.noise_var):.4f} bits")

# Rate decays as the noise grows.
noises = np.logspace(-3, 1, 25)
rates = [kgr(P, R, s2) for s2 in noises]
fig, ax = plt.subplots(figsize=(5, 4))
ax.semilogx(noises, rates)
ax.set_xlabel("noise variance")
ax.set_ylabel("key rate (bits)")
fig.tight_layout()
fig.savefig(OUT / "rate_vs_noise.png", dpi=120)
print(f"wrote {OUT / 'rate_vs_noise.png'}")

# ---------------------------------------------------------------------------
# Gradient of the negative rate versus central finite differences.
grad = kgr_gradient(P, R, scen.noise_var)
h = 1e-6
fd = np.zeros_like(P)
for i in range(4):
    for j in range(4):
        for axis in (1.0, 1.0j):
            d = np.zeros_like(P)
            d[i, j] = axis * h
            fd[i, j] += axis * (-kgr(P + d, R, scen.noise_var) + kgr(P - d, R, scen.noise_var)) / (2 * h)
rel = np.abs(grad - fd).max() / np.abs(fd).max()
print(f"\ngradient vs finite differences: max relative error {rel:.2e}")
print("gradient norm:", np.linalg.norm(grad).round(4))
