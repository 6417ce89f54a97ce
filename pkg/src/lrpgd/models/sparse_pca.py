"""Row-sparse principal component estimation from a spiked covariance.

Samples are drawn from N(0, gamma T T^T + I) where the orthonormal factor T
has at most k nonzero rows.  The factorized objective is linear (and globally
concave) in the lifted variable,

    loss(F) = -<cov, F F^T>,      gradient -2 cov F,

so all curvature comes from the constraint set {||F||_op <= 1,
sum_i ||row_i||_2 <= radius}; the radius defaults to the target's own value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInitError, DimensionError, InfeasibleSetError, ParameterError
from ..factors import GroundTruth, as_factor, haar_orthonormal
from ..projections import SpectralL21Spec, project_spectral_l21
from .base import ModelInstance


@dataclass(frozen=True)
class SpikedModel:
    """A sampled spiked-covariance instance bound to its empirical covariance."""

    d: int
    r: int
    k: int
    gamma: float
    n: int
    support: np.ndarray
    ground_truth: GroundTruth
    cov: np.ndarray
    l21_radius: float


def generate(d, r, k, gamma, n, seed):
    """Draw support, embedded orthonormal target, and n covariance samples."""
    if k < r:
        raise InfeasibleSetError(f"need k >= r to fit {r} orthonormal rows, got k={k}")
    if not gamma > 0:
        raise ParameterError("signal-to-noise ratio must be positive")
    if n < 1:
        raise ParameterError("need n >= 1")
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(d, size=k, replace=False))
    theta = np.zeros((d, r))
    theta[support] = haar_orthonormal(k, r, rng)
    gt = GroundTruth.from_factor(theta)
    # N(0, gamma T T^T + I) via the square root I + (sqrt(gamma+1)-1) T T^T
    z = rng.standard_normal((n, d))
    c = np.sqrt(gamma + 1.0) - 1.0
    x = z + c * (z @ gt.factor) @ gt.factor.T
    cov = (x.T @ x) / n
    radius = float(np.sum(np.sqrt(np.einsum("ij,ij->i", gt.factor, gt.factor))))
    return SpikedModel(
        d=d, r=r, k=k, gamma=gamma, n=n,
        support=support, ground_truth=gt, cov=cov, l21_radius=radius,
    )


def loss_grad(model, f, stats=None):
    f = as_factor(f)
    if f.shape[0] != model.d:
        raise DimensionError(f"factor rows {f.shape[0]} != ambient dimension {model.d}")
    cf = model.cov @ f
    return float(-np.sum(f * cf)), -2.0 * cf


def default_spec(model, dykstra_max_iters=500, dykstra_tol=1e-10):
    return SpectralL21Spec(
        spectral_radius=1.0,
        l21_radius=model.l21_radius,
        dykstra_max_iters=dykstra_max_iters,
        dykstra_tol=dykstra_tol,
    )


def project(f, spec: SpectralL21Spec):
    return project_spectral_l21(f, spec)


def init_diag_threshold(model, r, spec=None):
    """Start from the leading eigenvectors of the densest diagonal block.

    Keeps the k coordinates with the largest sample variances, takes the top-r
    eigenvectors of that principal submatrix, embeds them, and projects onto
    the constraint set.
    """
    spec = spec if spec is not None else default_spec(model)
    diag = np.diag(model.cov)
    idx = np.argsort(-diag, kind="stable")[: model.k]
    sub = model.cov[np.ix_(idx, idx)]
    vals, vecs = np.linalg.eigh(sub)
    order = np.argsort(-vals, kind="stable")[:r]
    if np.count_nonzero(vals[order] > 0) < r:
        raise DegenerateInitError("fewer than r positive submatrix eigenvalues")
    theta0 = np.zeros((model.d, r))
    theta0[idx] = vecs[:, order]
    return project_spectral_l21(theta0, spec)


def init_perturbed(model, seed, spec=None):
    """Unit-norm perturbations of the target, split on and off the support.

    Rank-1 protocol: theta0 = theta* + (1/sqrt(2)) E1 on the support rows and
    theta* + (1/sqrt(2)) E2 elsewhere, for independent random unit vectors E1,
    E2; the result is projected onto the constraint set.
    """
    if model.r != 1:
        raise ParameterError("perturbation start is defined for rank-1 instances")
    spec = spec if spec is not None else default_spec(model)
    rng = np.random.default_rng(seed)
    on = np.zeros(model.d, dtype=bool)
    on[model.support] = True
    e1 = rng.standard_normal(int(on.sum()))
    e2 = rng.standard_normal(int((~on).sum()))
    e1 /= np.linalg.norm(e1)
    if e2.size:
        e2 /= np.linalg.norm(e2)
    theta0 = model.ground_truth.factor[:, 0].copy()
    theta0[on] += e1 / np.sqrt(2.0)
    theta0[~on] += e2 / np.sqrt(2.0)
    return project_spectral_l21(theta0[:, None], spec)


def instance(model, spec=None):
    spec = spec if spec is not None else default_spec(model)
    return ModelInstance(
        name="sparse-pca",
        d=model.d,
        r=model.r,
        loss_grad=lambda f, stats=None: loss_grad(model, f, stats),
        project=lambda f: project_spectral_l21(f, spec),
    )
