"""Factor-matrix linear algebra shared by every model.

A rank-r PSD matrix can be written as F F^T for a d x r factor F, and that
factorization is only determined up to an orthogonal mixing of the columns.
This module treats factors modulo that ambiguity: rotation-invariant distance
between factors, the closest aligned representative of a ground truth, the
principal-angle subspace distance, and seeded Haar-distributed orthonormal
sampling.

Factors are plain ``numpy`` arrays of shape ``(d, r)``; no wrapper class.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateAlignmentWarning,
    DegenerateSubspaceError,
    DimensionError,
    NonUniqueAlignmentError,
)

ORTHO_TOL = 1e-10  # column-orthogonality tolerance for ground-truth factors
ALIGN_TOL = 1e-8   # alignment residual tolerance


def as_factor(f, name="factor"):
    """Validate a dense d x r factor: 2-D, finite, r <= d."""
    arr = np.asarray(f, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    d, r = arr.shape
    if r > d:
        raise DimensionError(f"{name} needs r <= d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class GroundTruth:
    """A target factor with pairwise-orthogonal columns.

    ``singular_values`` are the column norms in nonincreasing order (these are
    the singular values of ``factor``), ``kappa`` their ratio first/last, and
    ``mu`` the row incoherence d * max_i ||row_i||^2 / (r * sigma_1^2).
    """

    factor: np.ndarray
    singular_values: np.ndarray
    kappa: float
    mu: float

    @property
    def d(self):
        return self.factor.shape[0]

    @property
    def r(self):
        return self.factor.shape[1]

    @property
    def sigma_r(self):
        return float(self.singular_values[-1])

    @property
    def op_norm(self):
        return float(self.singular_values[0])

    @classmethod
    def from_factor(cls, factor):
        factor = as_factor(factor, "ground-truth factor")
        d, r = factor.shape
        gram = factor.T @ factor
        norms = np.sqrt(np.diag(gram))
        if np.any(norms <= 0):
            raise ValueError("ground-truth factor has a zero column")
        off = gram - np.diag(np.diag(gram))
        scale = max(1.0, float(np.max(np.diag(gram))))
        if np.max(np.abs(off)) > ORTHO_TOL * scale:
            raise ValueError("ground-truth columns are not pairwise orthogonal")
        order = np.argsort(-norms, kind="stable")
        factor = factor[:, order]
        sv = norms[order]
        kappa = float(sv[0] / sv[-1])
        row_sq = np.einsum("ij,ij->i", factor, factor)
        mu = float(d * np.max(row_sq) / (r * sv[0] ** 2))
        return cls(factor=factor, singular_values=sv, kappa=kappa, mu=mu)


@dataclass(frozen=True)
class SpectralInfo:
    """Top-r spectral data of a symmetric matrix (values sorted descending)."""

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray


def top_spectral(sym, r, by_magnitude=False):
    """Top-r eigenpairs of a symmetric matrix as a :class:`SpectralInfo`.

    With ``by_magnitude`` the ranking is by |eigenvalue| (singular values of
    the symmetric matrix); otherwise by algebraic value.
    """
    sym = np.asarray(sym, dtype=float)
    vals, vecs = np.linalg.eigh(sym)
    key = -np.abs(vals) if by_magnitude else -vals
    order = np.argsort(key, kind="stable")[:r]
    vals = vals[order]
    vecs = vecs[:, order]
    if by_magnitude:
        signs = np.where(vals < 0, -1.0, 1.0)
        return SpectralInfo(np.abs(vals), vecs, vecs * signs)
    return SpectralInfo(vals, vecs, vecs)


def procrustes_distance(a, b):
    """min over orthogonal r x r Q of ||a - b Q||_F.

    Closed form: dist^2 = ||a||^2 + ||b||^2 - 2 * sum of singular values of
    a^T b; cost O(d r^2 + r^3), no search.
    """
    a = as_factor(a, "a")
    b = as_factor(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    sv = np.linalg.svd(a.T @ b, compute_uv=False)
    gap = np.dot(a.ravel(), a.ravel()) + np.dot(b.ravel(), b.ravel()) - 2.0 * sv.sum()
    return float(np.sqrt(max(gap, 0.0)))


def factor_dist(f, gt):
    """Rotation-invariant Frobenius distance from ``f`` to the ground truth."""
    return procrustes_distance(f, gt.factor)


def procrustes_residual(a, b):
    """Like :func:`procrustes_distance` but via the aligned difference.

    Forms the optimal rotation explicitly and measures ||a - b Q||_F, which
    stays accurate below the closed form's cancellation floor (~sqrt(eps));
    preferred when distances near machine precision matter.
    """
    a = as_factor(a, "a")
    b = as_factor(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    p, _, qt = np.linalg.svd(b.T @ a)
    return float(np.linalg.norm(a - b @ (p @ qt)))


def aligned_representative(f, gt, best_effort=False):
    """Orthogonal-column factorization of the target closest to ``f``.

    Unique whenever ``factor_dist(f, gt) < sigma_r``; outside that regime a
    :class:`NonUniqueAlignmentError` is raised unless ``best_effort`` is set,
    in which case a deterministic tie-break (SVD-based rotation, measure-zero
    degeneracies resolved toward the stored factor) is returned with a
    :class:`DegenerateAlignmentWarning`.

    The result ``A`` satisfies ``||f - A||_F == factor_dist(f, gt)`` and
    ``f.T @ A`` symmetric PSD.
    """
    f = as_factor(f, "factor")
    if f.shape != gt.factor.shape:
        raise DimensionError(f"shape mismatch: {f.shape} vs {gt.factor.shape}")
    dist = factor_dist(f, gt)
    if dist >= gt.sigma_r:
        if not best_effort:
            raise NonUniqueAlignmentError(
                f"distance {dist:.3g} >= sigma_r {gt.sigma_r:.3g}: "
                "nearest factorization may not be unique"
            )
        warnings.warn(
            "alignment outside the uniqueness regime; using deterministic tie-break",
            DegenerateAlignmentWarning,
            stacklevel=2,
        )
    u = f.T @ gt.factor
    p, sv, qt = np.linalg.svd(u)
    scale = max(1.0, float(np.linalg.norm(f)) * gt.op_norm)
    if sv.max(initial=0.0) <= 1e-14 * scale:
        # f is orthogonal to the whole target span; deterministic tie-break
        # toward the stored factor itself
        return gt.factor.copy()
    # rotation Q P^T realizes theta0 U^T (U U^T)^{-1/2}
    return gt.factor @ (qt.T @ p.T)


def subspace_sin_dist(f, g):
    """Squared sin-angle distance between the column spaces of two factors.

    Returns sum_i (1 - cos^2 psi_i) over the r principal angles psi_i; lies in
    [0, r], is symmetric, and is zero exactly when the column spaces agree.
    """
    qf = _orthonormal_basis(f, "first factor")
    qg = _orthonormal_basis(g, "second factor")
    if qf.shape != qg.shape:
        raise DimensionError(f"shape mismatch: {qf.shape} vs {qg.shape}")
    cos = np.linalg.svd(qf.T @ qg, compute_uv=False)
    cos = np.clip(cos, 0.0, 1.0)
    r = qf.shape[1]
    return float(max(r - np.sum(cos**2), 0.0))


def _orthonormal_basis(f, name):
    f = as_factor(f, name)
    u, s, _ = np.linalg.svd(f, full_matrices=False)
    if s[-1] <= max(f.shape) * np.finfo(float).eps * s[0] or s[-1] == 0.0:
        raise DegenerateSubspaceError(f"{name} is rank-deficient")
    return u


def haar_orthonormal(d, r, rng):
    """Haar-distributed d x r orthonormal frame drawn from ``rng``.

    Orthonormalizes an i.i.d. standard-Gaussian matrix and fixes each column's
    sign so its first nonzero entry is positive (reproducible canonical form;
    the column-space law is unaffected).
    """
    if r > d:
        raise DimensionError(f"need r <= d, got d={d}, r={r}")
    g = rng.standard_normal((d, r))
    q, _ = np.linalg.qr(g)
    for j in range(r):
        col = q[:, j]
        nz = np.flatnonzero(col)
        if nz.size and col[nz[0]] < 0:
            q[:, j] = -col
    return q


def random_orthonormal(d, r, seed):
    """Seeded Haar orthonormal factor; identical output for identical seeds."""
    return haar_orthonormal(d, r, np.random.default_rng(seed))


def make_ground_truth(d, r, seed, singular_values=None):
    """Random ground truth: Haar orthonormal columns scaled by the given profile."""
    q = random_orthonormal(d, r, seed)
    if singular_values is None:
        return GroundTruth.from_factor(q)
    sv = np.asarray(singular_values, dtype=float)
    if sv.shape != (r,):
        raise DimensionError(f"singular value profile must have length {r}")
    return GroundTruth.from_factor(q * sv)


def outer_gap_sq(f, g):
    """||F F^T - G G^T||_F^2 computed in O(d r^2) via Gram identities."""
    f = as_factor(f, "f")
    g = as_factor(g, "g")
    ftf = f.T @ f
    gtg = g.T @ g
    ftg = f.T @ g
    val = np.sum(ftf * ftf) - 2.0 * np.sum(ftg * ftg) + np.sum(gtg * gtg)
    return float(max(val, 0.0))


def per_entry_error(f, gt):
    """(1/d^2) ||F F^T - T T^T||_F^2 against the ground-truth factor T."""
    f = as_factor(f, "f")
    if f.shape != gt.factor.shape:
        raise DimensionError(f"shape mismatch: {f.shape} vs {gt.factor.shape}")
    d = f.shape[0]
    return outer_gap_sq(f, gt.factor) / float(d * d)
