"""Noisy matrix completion under a symmetric Bernoulli observation mask.

Entries of the PSD target T T^T are observed with probability p on the
half-triangle (i >= j) and mirrored; observed values carry additive Gaussian
noise.  The loss is the mask-restricted squared error rescaled by 1/p,

    (1/2p) sum_{(i,j) observed} ((F F^T)_ij - Y_ij)^2,

with the sum running over the full symmetric index set (off-diagonal pairs
twice).  The constraint set caps every row of F at sqrt(2 mu / d) ||theta0||_F.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..errors import DegenerateInitError, DimensionError, ParameterError
from ..factors import GroundTruth, as_factor, haar_orthonormal, per_entry_error, top_spectral
from ..projections import RowClipSpec, clip_rows, row_clip_radius
from .base import ModelInstance

__all__ = [
    "MaskedMatrix",
    "from_pairs",
    "generate",
    "loss_grad",
    "project",
    "init_svd",
    "init_svd_factor",
    "default_row_spec",
    "per_entry_error",
    "instance",
]


@dataclass(frozen=True)
class MaskedMatrix:
    """Observed entries of a symmetric matrix plus sparse index plumbing.

    ``base_rows/base_cols`` list the sampled half-triangle pairs (i >= j);
    ``rows/cols/vals`` are the mirrored full symmetric set (diagonal once).
    ``indptr/indices`` hold a prebuilt CSR skeleton for the mask so the
    gradient can assemble a sparse residual matrix without re-sorting.
    """

    d: int
    obs_prob: float
    base_rows: np.ndarray
    base_cols: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    noise_sd: float
    indptr: np.ndarray = field(repr=False, default=None)
    indices: np.ndarray = field(repr=False, default=None)

    @property
    def n_observed(self):
        return int(self.base_rows.size)


def _mirror(base_rows, base_cols, base_vals, d):
    off = base_rows != base_cols
    rows = np.concatenate([base_rows, base_cols[off]])
    cols = np.concatenate([base_cols, base_rows[off]])
    vals = np.concatenate([base_vals, base_vals[off]])
    return rows, cols, vals


def from_pairs(d, p, base_rows, base_cols, base_vals, noise_sd=0.0):
    """Build a :class:`MaskedMatrix` from explicit half-triangle observations."""
    base_rows = np.asarray(base_rows, dtype=np.int64)
    base_cols = np.asarray(base_cols, dtype=np.int64)
    base_vals = np.asarray(base_vals, dtype=float)
    if np.any(base_rows < base_cols):
        raise DimensionError("base pairs must satisfy i >= j")
    rows, cols, vals = _mirror(base_rows, base_cols, base_vals, d)
    perm = np.lexsort((cols, rows))
    rows_s, cols_s = rows[perm], cols[perm]
    indptr = np.zeros(d + 1, dtype=np.int64)
    np.add.at(indptr, rows_s + 1, 1)
    indptr = np.cumsum(indptr)
    return MaskedMatrix(
        d=d,
        obs_prob=p,
        base_rows=base_rows,
        base_cols=base_cols,
        rows=rows_s,
        cols=cols_s,
        vals=vals[perm],
        noise_sd=noise_sd,
        indptr=indptr,
        indices=cols_s,
    )


def sample_mask(d, p, rng):
    """Bernoulli(p) over the half-triangle i >= j; returns (rows, cols)."""
    tri_r, tri_c = np.tril_indices(d)
    keep = rng.random(tri_r.size) < p
    return tri_r[keep], tri_c[keep]


def generate(d, r, p, noise_sd, seed):
    """Random instance with an equal-singular-value orthonormal target."""
    if not 0 < p <= 1:
        raise ParameterError(f"observation probability must be in (0, 1], got {p}")
    rng = np.random.default_rng(seed)
    gt = GroundTruth.from_factor(haar_orthonormal(d, r, rng))
    base_rows, base_cols = sample_mask(d, p, rng)
    clean = np.einsum("ij,ij->i", gt.factor[base_rows], gt.factor[base_cols])
    noise = noise_sd * rng.standard_normal(base_rows.size) if noise_sd > 0 else 0.0
    data = from_pairs(d, p, base_rows, base_cols, clean + noise, noise_sd)
    return data, gt


def _residual_matrix(data, resid):
    return sparse.csr_matrix(
        (resid, data.indices, data.indptr), shape=(data.d, data.d), copy=False
    )


def loss_grad(data, f, stats=None):
    f = as_factor(f)
    if f.shape[0] != data.d:
        raise DimensionError(f"factor rows {f.shape[0]} != ambient dimension {data.d}")
    fits = np.einsum("ij,ij->i", f[data.rows], f[data.cols])
    resid = fits - data.vals
    loss = float(0.5 * np.dot(resid, resid) / data.obs_prob)
    grad = (2.0 / data.obs_prob) * (_residual_matrix(data, resid) @ f)
    return loss, grad


def project(f, spec: RowClipSpec):
    return clip_rows(f, spec)


def init_svd_factor(data, r):
    """Unconstrained scaled eigenfactor of the inverse-probability-filled matrix.

    Zero-fills unobserved entries, rescales by 1/p (an unbiased estimate of
    the target), takes the top-r eigenpairs with negative eigenvalues clipped,
    and returns U sqrt(S).
    """
    if data.n_observed == 0:
        raise DegenerateInitError("empty observation mask")
    filled = _residual_matrix(data, data.vals / data.obs_prob).toarray()
    info = top_spectral(filled, r)
    if np.all(info.singular_values <= 0):
        raise DegenerateInitError("fewer than one nonnegative leading eigenvalue")
    vals = np.maximum(info.singular_values, 0.0)
    return info.left_vectors * np.sqrt(vals)


def init_svd(data, r, spec: RowClipSpec):
    """Row-clipped version of :func:`init_svd_factor`."""
    return clip_rows(init_svd_factor(data, r), spec)


def default_row_spec(mu, d, theta0_raw):
    """Row cap sqrt(2 mu / d) * ||theta0||_F from an unclipped initializer."""
    return RowClipSpec(radius=row_clip_radius(mu, d, np.linalg.norm(theta0_raw)))


def instance(data, spec: RowClipSpec, r=None):
    return ModelInstance(
        name="completion",
        d=data.d,
        r=r if r is not None else 0,
        loss_grad=lambda f, stats=None: loss_grad(data, f, stats),
        project=lambda f: clip_rows(f, spec),
    )
