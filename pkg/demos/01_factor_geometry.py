"""Factor geometry 101: distances modulo rotation, alignment, angles.

A rank-r PSD matrix M = F F^T does not pin down F: any orthogonal mixing
F Q gives the same M.  This walk-through shows how the toolkit measures
estimation error in a way that ignores that ambiguity.
"""

import numpy as np

from lrpgd import (
    aligned_representative,
    factor_dist,
    make_ground_truth,
    random_orthonormal,
    subspace_sin_dist,
)

rng = np.random.default_rng(0)

# A ground truth with orthonormal columns (all singular values equal to 1).
gt = make_ground_truth(d=8, r=2, seed=1)
print("ground truth shape:", gt.factor.shape)
print("singular values:", gt.singular_values, " incoherence mu:", round(gt.mu, 3))

# Rotating the factor changes the matrix entries but not F F^T, and the
# distance sees straight through it.
q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
rotated = gt.factor @ q
print("\ndistance to a rotated copy:", factor_dist(rotated, gt))

# A perturbed factor has a well-defined nearest valid factorization; the
# aligned representative realizes the distance exactly.
noisy = gt.factor + 0.1 * rng.standard_normal((8, 2))
anchor = aligned_representative(noisy, gt)
print("perturbed factor: dist =", round(factor_dist(noisy, gt), 6))
print("aligned residual  ||F - A||_F =", round(float(np.linalg.norm(noisy - anchor)), 6))
print("F^T A symmetric?  asymmetry =", float(np.linalg.norm(noisy.T @ anchor - (noisy.T @ anchor).T)))

# The subspace metric compares column spaces only: invariant to any
# invertible column mixing, not just orthogonal ones.
mixed = noisy @ (np.eye(2) + 0.5 * rng.standard_normal((2, 2)))
print("\nsin^2 distance, noisy vs ground truth:", round(subspace_sin_dist(noisy, gt.factor), 6))
print("sin^2 distance, after invertible mixing:", round(subspace_sin_dist(mixed, gt.factor), 6))

# Haar sampling is seeded and canonical: identical seeds, identical frames.
a = random_orthonormal(6, 2, seed=7)
b = random_orthonormal(6, 2, seed=7)
print("\nseeded Haar frames identical:", bool(np.array_equal(a, b)))
