"""Walk through the channel model: responses, closed-form covariance, sampling.

The channel at a movable antenna is a sum of L plane waves.  Its covariance
over the random path gains has a closed form that depends only on pairwise
antenna displacements; the Monte-Carlo estimator converges to it at the
usual 1/sqrt(M) rate.  Run from the repository root:

    python demos/01_channel_and_covariance.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fluidkey import (
    Scenario,
    analytic_covariance,
    channel_response,
    mc_covariance,
    sample_paths,
    stream,
    upa_layout,
    validate_covariance,
)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# ---------------------------------------------------------------------------
# A scenario bundles the physical constants; a PathSet is one quasi-static
# draw of the propagation environment.
scen = Scenario()  # N=4 antennas, S=4 pilots, L=8 paths, region [0, 20]^2
paths = sample_paths(scen, stream(scen.seed, "paths"))
print(f"paths: L={paths.n_paths}, total power {paths.total_power:.3f}")
print("elevations:", np.round(paths.elevations, 3))
print("direction norms (<= 1 by construction):", np.round(np.linalg.norm(paths.directions, axis=1), 3))

# ---------------------------------------------------------------------------
# One realized channel vector at the grid layout.
layout = upa_layout(scen)
gains = (stream(scen.seed, "gains").standard_normal(paths.n_paths)
         + 1j * stream(scen.seed, "gains", 1).standard_normal(paths.n_paths))
gains *= np.sqrt(paths.gain_vars / 2)
h = channel_response(layout, paths, gains, scen.wavelength)
print("\nchannel at the grid layout:", np.round(h, 3))

# ---------------------------------------------------------------------------
# Closed-form covariance: Hermitian PSD, unit diagonal (total power 1),
# invariant under translating the whole array.
R = analytic_covariance(layout, paths, scen.wavelength)
validate_covariance(R, expected_diag=paths.total_power)
print("\ncovariance eigenvalues:", np.round(np.linalg.eigvalsh(R), 4))
shifted = analytic_covariance(layout + [5.0, -2.0], paths, scen.wavelength)
print("translation invariance error:", np.abs(R - shifted).max())

# ---------------------------------------------------------------------------
# The sampled covariance converges to the closed form at rate 1/sqrt(M).
sizes = [10, 100, 1000, 10_000]
errors = []
for m in sizes:
    reps = [
        np.linalg.norm(mc_covariance(layout, paths, scen.wavelength, m, stream(0, "mc", k)) - R)
        for k in range(10)
    ]
    errors.append(np.mean(reps))
    print(f"M={m:>6d}: mean Frobenius error {errors[-1]:.4f}")
slope = np.polyfit(np.log10(sizes), np.log10(errors), 1)[0]
print(f"log-log slope: {slope:.3f} (expected about -0.5)")

fig, ax = plt.subplots(figsize=(5, 4))
ax.loglog(sizes, errors, "o-", label="measured")
ax.loglog(sizes, errors[0] * (np.array(sizes) / sizes[0]) ** -0.5, "--", label="1/sqrt(M)")
ax.set_xlabel("Monte-Carlo samples M")
ax.set_ylabel("Frobenius error vs closed form")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "covariance_convergence.png", dpi=120)
print(f"\nwrote {OUT / 'covariance_convergence.png'}")
