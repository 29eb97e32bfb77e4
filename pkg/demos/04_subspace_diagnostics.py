"""Walkthrough: principal angles and channel contributions.

Fits the noise variant to eye-blink-contaminated data, then compares the
two cluster subspaces and the noise-weighted subspace: angles show how
much the clusters share, per-channel loading mass shows which electrodes
shape each subspace (blink energy concentrates on frontal channels).

Run:  python3 demos/04_subspace_diagnostics.py
"""

import math

import numpy as np

from rfcpca import (
    channel_contributions,
    fit_rfcpca_n,
    noise_subspace,
    principal_angles,
    select_lambda_elbow,
)
from rfcpca.experiments import make_benchmark_dataset

SEED = 21
P = 16

dataset, manifest = make_benchmark_dataset("eyeblink", p=P, t_spec=(300, 800), seed=SEED)
print(f"contaminated trials: {dataset.contaminated_indices().tolist()}")
frontal = list(range(math.ceil(0.25 * P)))
print(f"frontal channels (blink targets): {frontal}")

elbow = select_lambda_elbow(dataset, 2, m=2.0, v=0.99, seed=1)
fit = fit_rfcpca_n(dataset, 2, m=2.0, v=0.99, lam=elbow.lambda_star, seed=1)
print(f"flagged as noise: {fit.flagged.tolist()}")

noise = noise_subspace(dataset, fit)
subspaces = {"cluster 0": fit.subspaces.axes[0],
             "cluster 1": fit.subspaces.axes[1],
             "noise": noise.axes[0]}

print("\nprincipal angles (degrees, smallest three) at lag 1:")
names = list(subspaces)
for i in range(len(names)):
    for j in range(i + 1, len(names)):
        angles = principal_angles(subspaces[names[i]][0], subspaces[names[j]][0])
        shown = np.degrees(angles[:3]).round(1)
        print(f"  {names[i]:>9} vs {names[j]:<9} {shown}")
print("the two clusters share their theta axes (small leading angles);")
print("the noise subspace stands apart from both.")

print("\nper-channel contribution to each subspace (lag 1):")
header = "channel " + " ".join(f"{name:>10}" for name in names)
print(header)
for ch in range(P):
    row = []
    for name in names:
        contrib = channel_contributions(subspaces[name][0], P)
        row.append(f"{contrib[ch]:>10.3f}")
    marker = "  <- frontal" if ch in frontal else ""
    print(f"{ch + 1:>7} " + " ".join(row) + marker)
