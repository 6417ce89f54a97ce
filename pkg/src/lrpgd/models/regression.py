"""Matrix regression with symmetric Gaussian designs.

Observations y_i = <X_i, T T^T> + eps_i for i.i.d. designs X_i (standard
Gaussian entries, symmetrized as (G + G^T)/2) and Gaussian noise.  The loss is
the factorized least-squares cost

    (1/2n) sum_i (y_i - <X_i, F F^T>)^2,

optimized without constraints.  Note the printed gradient convention here is
residual-first, (<X_i, F F^T> - y_i), so that descent decreases the loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInitError, DimensionError, ParameterError
from ..factors import GroundTruth, as_factor, haar_orthonormal, top_spectral
from .base import ModelInstance, identity_projection


@dataclass(frozen=True)
class SensingData:
    """n symmetric d x d designs with their noisy linear responses."""

    designs: np.ndarray  # (n, d, d), each symmetric
    responses: np.ndarray  # (n,)
    noise_sd: float

    @property
    def n(self):
        return self.designs.shape[0]

    @property
    def d(self):
        return self.designs.shape[1]


def generate(d, r, n, noise_sd, seed, singular_values=None):
    """Draw a random instance; returns ``(SensingData, GroundTruth)``."""
    if n < 1:
        raise ParameterError(f"need n >= 1, got {n}")
    if noise_sd < 0:
        raise ParameterError("noise_sd must be nonnegative")
    rng = np.random.default_rng(seed)
    q = haar_orthonormal(d, r, rng)
    if singular_values is not None:
        q = q * np.asarray(singular_values, dtype=float)
    gt = GroundTruth.from_factor(q)
    raw = rng.standard_normal((n, d, d))
    designs = 0.5 * (raw + np.transpose(raw, (0, 2, 1)))
    target = gt.factor @ gt.factor.T
    clean = designs.reshape(n, -1) @ target.ravel()
    noise = noise_sd * rng.standard_normal(n) if noise_sd > 0 else np.zeros(n)
    return SensingData(designs=designs, responses=clean + noise, noise_sd=noise_sd), gt


def _apply(data, mat):
    """<X_i, mat> for every design."""
    return data.designs.reshape(data.n, -1) @ np.asarray(mat, dtype=float).ravel()


def matrix_loss(data, mat):
    """Least-squares cost evaluated at a full symmetric matrix."""
    res = _apply(data, mat) - data.responses
    return float(0.5 * np.dot(res, res) / data.n)


def loss_grad(data, f, stats=None):
    f = as_factor(f)
    if f.shape[0] != data.d:
        raise DimensionError(f"factor rows {f.shape[0]} != ambient dimension {data.d}")
    fits = np.einsum("nij,ij->n", data.designs, f @ f.T)
    res = fits - data.responses
    loss = float(0.5 * np.dot(res, res) / data.n)
    grad_mat = np.tensordot(res, data.designs, axes=(0, 0)) / data.n
    return loss, 2.0 * grad_mat @ f


def init_svd(data, r):
    """Scaled top-r eigenfactor of the response-weighted design average.

    Builds (1/n) sum_i y_i X_i, takes its top-r eigenpairs, clips negative
    eigenvalues to zero, and returns U sqrt(S).
    """
    avg = np.tensordot(data.responses, data.designs, axes=(0, 0)) / data.n
    info = top_spectral(avg, r)
    if np.all(info.singular_values <= 0):
        raise DegenerateInitError("all leading eigenvalues are nonpositive")
    vals = np.maximum(info.singular_values, 0.0)
    return info.left_vectors * np.sqrt(vals)


def rip_estimate(data, rank_k, trials, seed, candidates=None):
    """Empirical restricted-isometry distortion over sampled low-rank directions.

    Samples unit-Frobenius symmetric matrices of rank <= rank_k (signed factor
    outer products M = A diag(s) A^T) and returns the largest observed
    | ||X(M)||^2 / n - 1 |.  Explicit ``candidates`` (symmetric matrices,
    normalized internally) replace the sampling when given.
    """
    if candidates is None:
        if trials < 1:
            raise ParameterError("need trials >= 1")
        rng = np.random.default_rng(seed)
        mats = []
        for _ in range(trials):
            a = rng.standard_normal((data.d, rank_k))
            signs = rng.choice([-1.0, 1.0], size=rank_k)
            mats.append((a * signs) @ a.T)
    else:
        mats = [np.asarray(m, dtype=float) for m in candidates]
    worst = 0.0
    for m in mats:
        m = m / np.linalg.norm(m)
        xm = _apply(data, m)
        dev = abs(float(np.dot(xm, xm)) / data.n - 1.0)
        worst = max(worst, dev)
    return worst


def instance(data, r):
    return ModelInstance(
        name="regression",
        d=data.d,
        r=r,
        loss_grad=lambda f, stats=None: loss_grad(data, f, stats),
        project=identity_projection,
    )
