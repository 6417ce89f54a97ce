"""Projected gradient descent on low-rank matrix factorizations.

A rank-r PSD matrix is represented as F F^T and estimated by projected
gradient descent on the d x r factor F.  The package bundles the shared
factor linear algebra, exact projections for the constraint sets that arise
in practice, the solver with its step schedules, six statistical models
(matrix regression, matrix completion, one-bit completion, row-sparse PCA,
planted densest subgraph, low-rank plus sparse decomposition), empirical
regularity probes, and a reproducible experiment harness (``lrpgd`` CLI).
"""

from .factors import (
    GroundTruth,
    SpectralInfo,
    aligned_representative,
    factor_dist,
    make_ground_truth,
    per_entry_error,
    procrustes_distance,
    procrustes_residual,
    random_orthonormal,
    subspace_sin_dist,
)
from .projections import (
    BoxSimplexSpec,
    RowClipSpec,
    SpectralL21Spec,
    clip_rows,
    project_box_simplex,
    project_columns_l1,
    project_l1_ball,
    project_spectral_l21,
)
from .solver import (
    Constant,
    Diminishing,
    SolverOptions,
    SolverTrace,
    diminishing_schedule,
    geometric_schedule,
    pgd,
)
from .probes import ProbeConfig, ProbeReport, probe_descent, probe_model, probe_smooth_lipschitz

__version__ = "0.1.0"

__all__ = [
    "GroundTruth",
    "SpectralInfo",
    "aligned_representative",
    "factor_dist",
    "make_ground_truth",
    "per_entry_error",
    "procrustes_distance",
    "procrustes_residual",
    "random_orthonormal",
    "subspace_sin_dist",
    "BoxSimplexSpec",
    "RowClipSpec",
    "SpectralL21Spec",
    "clip_rows",
    "project_box_simplex",
    "project_columns_l1",
    "project_l1_ball",
    "project_spectral_l21",
    "Constant",
    "Diminishing",
    "SolverOptions",
    "SolverTrace",
    "diminishing_schedule",
    "geometric_schedule",
    "pgd",
    "ProbeConfig",
    "ProbeReport",
    "probe_descent",
    "probe_model",
    "probe_smooth_lipschitz",
    "__version__",
]
