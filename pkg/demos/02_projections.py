"""The constraint sets and their exact Euclidean projections.

Each statistical model constrains its factor iterates to a convex set; this
script exercises all five projections and checks the textbook facts
(idempotence, feasibility) numerically.
"""

import numpy as np

from lrpgd import (
    BoxSimplexSpec,
    RowClipSpec,
    SpectralL21Spec,
    clip_rows,
    project_box_simplex,
    project_columns_l1,
    project_l1_ball,
    project_spectral_l21,
)

rng = np.random.default_rng(0)

# Row clipping: rows over the cap are pulled back onto it, short rows stay.
f = rng.standard_normal((5, 2))
capped = clip_rows(f, RowClipSpec(radius=0.8))
print("row norms before:", np.linalg.norm(f, axis=1).round(3))
print("row norms after: ", np.linalg.norm(capped, axis=1).round(3))

# l1 ball: sort-based soft threshold.
v = np.array([2.0, 1.0, -0.3])
print("\nl1 projection of", v, "onto radius 1:", project_l1_ball(v, 1.0))

# column-wise l1 balls (the sparse-part feasible set of the decomposition
# model): each column projected independently.
s = rng.standard_normal((4, 4))
ps = project_columns_l1(s, np.full(4, 0.5))
print("\ncolumn l1 norms after projection:", np.abs(ps).sum(axis=0).round(3))

# box-mass set [0,1]^d with a fixed coordinate sum (planted-cluster set).
x = project_box_simplex(np.array([2.0, 0.3, -1.0, 0.6]), BoxSimplexSpec(mass=1.5))
print("\nbox-mass projection:", x.round(4), " sum:", round(float(x.sum()), 10))

# spectral cap + l2,1 cap intersection via Dykstra's corrected alternation.
spec = SpectralL21Spec(spectral_radius=1.0, l21_radius=1.5,
                       dykstra_max_iters=2000, dykstra_tol=1e-12)
g = 2.0 * rng.standard_normal((6, 2))
pg = project_spectral_l21(g, spec)
print("\nspectral norm after:", round(float(np.linalg.svd(pg, compute_uv=False)[0]), 6))
print("l2,1 norm after:    ", round(float(np.linalg.norm(pg, axis=1).sum()), 6))
pg2 = project_spectral_l21(pg, spec)
print("idempotence residual:", float(np.linalg.norm(pg2 - pg)))
