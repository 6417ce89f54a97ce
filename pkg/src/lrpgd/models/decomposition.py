"""Low-rank plus column-sparse decomposition of a corrupted symmetric matrix.

Observed Y = T T^T + S* + W, with S* symmetric and sparse (at most k nonzeros
per row/column after symmetrization) and W Gaussian noise.  The loss is the
squared distance of the deflated observation to the sparse-candidate set
{||S_.j||_1 <= radius_j for every column j},

    loss(F) = 0.5 min_S ||Y - F F^T - S||_F^2,

with the inner minimizer given exactly by the column-wise l1 projection.  The
column projection of a symmetric residual is not exactly symmetric (each
column gets its own threshold), so the gradient uses the symmetrized chain
rule -(D + D^T) F for D = residual - projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, DegenerateInitError, ParameterError
from ..factors import GroundTruth, as_factor, haar_orthonormal, top_spectral
from ..projections import RowClipSpec, clip_rows, project_columns_l1
from .base import ModelInstance


@dataclass(frozen=True)
class CorruptedMatrix:
    d: int
    observed: np.ndarray  # symmetric d x d
    radii: np.ndarray  # per-column l1 budgets for the sparse part
    noise_sd: float


def generate(d, r, k, spike_scale, noise_sd, seed):
    """Random instance; returns ``(CorruptedMatrix, GroundTruth, sparse_part)``.

    The sparse part places about k*d nonzeros symmetrically with at most k per
    row/column, magnitudes Uniform[0, spike_scale * r / d].
    """
    if k < 0 or k * d > d * d:
        raise ParameterError(f"per-row budget k={k} infeasible for d={d}")
    if noise_sd < 0:
        raise ParameterError("noise_sd must be nonnegative")
    rng = np.random.default_rng(seed)
    gt = GroundTruth.from_factor(haar_orthonormal(d, r, rng))
    spikes = _sample_sparse(d, k, spike_scale * r / d, rng)
    y = gt.factor @ gt.factor.T + spikes
    if noise_sd > 0:
        w = rng.standard_normal((d, d))
        y = y + noise_sd * 0.5 * (w + w.T)
    radii = np.abs(spikes).sum(axis=0)
    radii = np.maximum(radii, 1e-12)  # empty columns still need a valid budget
    return CorruptedMatrix(d=d, observed=y, radii=radii, noise_sd=noise_sd), gt, spikes


def _sample_sparse(d, k, scale, rng):
    """Symmetric sparse matrix, <= k nonzeros per row after mirroring.

    Rejection-balanced: half-triangle positions are visited in a uniformly
    random order, accepted while both endpoint rows have budget left, until
    about k*d total nonzeros are placed (or the positions run out).
    """
    spikes = np.zeros((d, d))
    if k == 0 or scale == 0:
        return spikes
    target_upper = (k * d) // 2
    tri_r, tri_c = np.triu_indices(d)
    order = rng.permutation(tri_r.size)
    counts = np.zeros(d, dtype=np.int64)
    placed = 0
    for pos in order:
        if placed >= target_upper:
            break
        i, j = int(tri_r[pos]), int(tri_c[pos])
        if i == j:
            if counts[i] >= k:
                continue
            spikes[i, i] = scale * rng.random()
            counts[i] += 1
        else:
            if counts[i] >= k or counts[j] >= k:
                continue
            val = scale * rng.random()
            spikes[i, j] = val
            spikes[j, i] = val
            counts[i] += 1
            counts[j] += 1
        placed += 1
    return spikes


def loss_grad(data, f, stats=None):
    f = as_factor(f)
    if f.shape[0] != data.d:
        raise DimensionError(f"factor rows {f.shape[0]} != ambient dimension {data.d}")
    resid = data.observed - f @ f.T
    best_sparse = project_columns_l1(resid, data.radii)
    deflated = resid - best_sparse
    loss = float(0.5 * np.sum(deflated * deflated))
    return loss, -(deflated + deflated.T) @ f


def inner_minimizer(data, f):
    """The optimal sparse part for a given factor (column l1 projection)."""
    return project_columns_l1(data.observed - f @ f.T, data.radii)


def project(f, spec: RowClipSpec):
    return clip_rows(f, spec)


def init_hard_threshold_factor(data, r, mu):
    """Unclipped scaled eigenfactor of the magnitude-capped observation.

    Entries of Y larger than mu*r/d in magnitude are clamped to that level
    (signed); the top-r singular factors U sqrt(S) of the result are returned.
    """
    if not mu > 0:
        raise ParameterError("incoherence level must be positive")
    level = mu * r / data.d
    capped = np.clip(data.observed, -level, level)
    info = top_spectral(capped, r, by_magnitude=True)
    if info.singular_values[-1] <= 0:
        raise DegenerateInitError("degenerate spectrum after magnitude capping")
    return info.left_vectors * np.sqrt(info.singular_values)


def init_hard_threshold(data, r, mu, spec: RowClipSpec):
    return clip_rows(init_hard_threshold_factor(data, r, mu), spec)


def instance(data, spec: RowClipSpec, r=None):
    return ModelInstance(
        name="decomposition",
        d=data.d,
        r=r if r is not None else 0,
        loss_grad=lambda f, stats=None: loss_grad(data, f, stats),
        project=lambda f: clip_rows(f, spec),
    )
