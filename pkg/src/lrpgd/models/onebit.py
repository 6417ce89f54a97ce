"""One-bit matrix completion: sign observations through a link function.

Each observed entry of the PSD target is reported as +1 with probability
f(T_ij / sigma) under a strictly increasing link f into (0, 1).  The loss is
the negative log-likelihood over the symmetric observation set,

    sum_{(i,j) observed} -(1 + Y_ij) log f(M_ij/sigma)
                         -(1 - Y_ij) log(1 - f(M_ij/sigma)),

whose matrix gradient restricted to the mask is
-(1/sigma) f'(x) (Y - 2 f(x) + 1) / (f(x)(1 - f(x))) at x = M/sigma.
Link probabilities are clamped into [1e-12, 1 - 1e-12] to keep the
log-likelihood finite; clamp counts are reported through ``stats``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse, special

from ..errors import DimensionError, ParameterError
from ..factors import GroundTruth, as_factor, haar_orthonormal
from ..projections import RowClipSpec, clip_rows
from .base import ModelInstance
from .completion import sample_mask

PROB_FLOOR = 1e-12

_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class LinkFunction:
    """A smooth CDF-style link with first and second derivatives."""

    name: str
    f: Callable
    fprime: Callable
    fsecond: Callable


def _logistic(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _logistic_prime(x):
    fv = _logistic(x)
    return fv * (1.0 - fv)


def _logistic_second(x):
    fv = _logistic(x)
    return fv * (1.0 - fv) * (1.0 - 2.0 * fv)


def _probit(x):
    return 0.5 * special.erfc(-x / math.sqrt(2.0))


def _probit_prime(x):
    return np.exp(-0.5 * x * x) / _SQRT2PI


def _probit_second(x):
    return -x * _probit_prime(x)


def _laplace(x):
    return np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(x, 0.0)))


def _laplace_prime(x):
    return 0.5 * np.exp(-np.abs(x))


def _laplace_second(x):
    # f' has a kink at 0; the a.e. derivative is -sign(x) f'(x), 0 at the kink
    return -np.sign(x) * 0.5 * np.exp(-np.abs(x))


LINKS = {
    "logistic": LinkFunction("logistic", _logistic, _logistic_prime, _logistic_second),
    "probit": LinkFunction("probit", _probit, _probit_prime, _probit_second),
    "laplace": LinkFunction("laplace", _laplace, _laplace_prime, _laplace_second),
}


def get_link(link):
    if isinstance(link, LinkFunction):
        return link
    try:
        return LINKS[link]
    except KeyError:
        raise ParameterError(f"unknown link {link!r}; choose from {sorted(LINKS)}") from None


@dataclass(frozen=True)
class BinaryObservations:
    """Symmetric +/-1 observations with CSR plumbing (mirrors MaskedMatrix)."""

    d: int
    obs_prob: float
    base_rows: np.ndarray
    base_cols: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    signs: np.ndarray
    noise_scale: float
    link: LinkFunction
    indptr: np.ndarray = field(repr=False, default=None)
    indices: np.ndarray = field(repr=False, default=None)


def from_pairs(d, p, base_rows, base_cols, base_signs, noise_scale, link):
    base_rows = np.asarray(base_rows, dtype=np.int64)
    base_cols = np.asarray(base_cols, dtype=np.int64)
    base_signs = np.asarray(base_signs, dtype=float)
    if np.any(base_rows < base_cols):
        raise DimensionError("base pairs must satisfy i >= j")
    off = base_rows != base_cols
    rows = np.concatenate([base_rows, base_cols[off]])
    cols = np.concatenate([base_cols, base_rows[off]])
    signs = np.concatenate([base_signs, base_signs[off]])
    perm = np.lexsort((cols, rows))
    rows_s, cols_s = rows[perm], cols[perm]
    indptr = np.zeros(d + 1, dtype=np.int64)
    np.add.at(indptr, rows_s + 1, 1)
    indptr = np.cumsum(indptr)
    return BinaryObservations(
        d=d,
        obs_prob=p,
        base_rows=base_rows,
        base_cols=base_cols,
        rows=rows_s,
        cols=cols_s,
        signs=signs[perm],
        noise_scale=noise_scale,
        link=get_link(link),
        indptr=indptr,
        indices=cols_s,
    )


def generate(d, r, p, noise_scale, link, seed):
    """Random instance: orthonormal target, Bernoulli mask, link-drawn signs."""
    if not 0 < p <= 1:
        raise ParameterError(f"observation probability must be in (0, 1], got {p}")
    if not noise_scale > 0:
        raise ParameterError("noise scale must be positive")
    link = get_link(link)
    rng = np.random.default_rng(seed)
    gt = GroundTruth.from_factor(haar_orthonormal(d, r, rng))
    base_rows, base_cols = sample_mask(d, p, rng)
    clean = np.einsum("ij,ij->i", gt.factor[base_rows], gt.factor[base_cols])
    probs = link.f(clean / noise_scale)
    signs = np.where(rng.random(base_rows.size) < probs, 1.0, -1.0)
    return from_pairs(d, p, base_rows, base_cols, signs, noise_scale, link), gt


def loss_grad(data, f, stats=None):
    f = as_factor(f)
    if f.shape[0] != data.d:
        raise DimensionError(f"factor rows {f.shape[0]} != ambient dimension {data.d}")
    x = np.einsum("ij,ij->i", f[data.rows], f[data.cols]) / data.noise_scale
    fv = data.link.f(x)
    clamped = int(np.count_nonzero((fv < PROB_FLOOR) | (fv > 1.0 - PROB_FLOOR)))
    if stats is not None:
        stats["clamped"] = stats.get("clamped", 0) + clamped
    fv = np.clip(fv, PROB_FLOOR, 1.0 - PROB_FLOOR)
    y = data.signs
    loss = float(np.sum(-(1.0 + y) * np.log(fv) - (1.0 - y) * np.log1p(-fv)))
    fp = data.link.fprime(x)
    entry = -(fp * (y - 2.0 * fv + 1.0)) / (fv * (1.0 - fv)) / data.noise_scale
    mat = sparse.csr_matrix((entry, data.indices, data.indptr), shape=(data.d, data.d), copy=False)
    return loss, 2.0 * (mat @ f)


def flatness_constants(link, a, grid_points=10001):
    """Sup-norm curvature/steepness constants of a link over |x| < a.

    Returns ``(L_a, gamma_a)`` where L_a is the max of the three ratios
    |f'|/(f(1-f)), f'^2/(f(1-f))^2 and |f''|/(f(1-f)), and gamma_a is the sup
    of f(1-f)/f'^2, all evaluated on a uniform grid with extra refinement at
    the endpoints (the suprema of the built-in links sit there).
    """
    if a < 0:
        raise ParameterError("need a >= 0")
    link = get_link(link)
    if a == 0:
        x = np.array([0.0])
    else:
        base = np.linspace(-a, a, grid_points)
        h = base[1] - base[0]
        edge = np.linspace(0.0, h, 101)
        x = np.unique(np.concatenate([base, -a + edge, a - edge]))
    fv = np.clip(link.f(x), PROB_FLOOR, 1.0 - PROB_FLOOR)
    fp = link.fprime(x)
    fpp = link.fsecond(x)
    denom = fv * (1.0 - fv)
    l_a = max(
        float(np.max(np.abs(fp) / denom)),
        float(np.max(fp**2 / denom**2)),
        float(np.max(np.abs(fpp) / denom)),
    )
    gamma_a = float(np.max(denom / fp**2))
    return l_a, gamma_a


def init_random(d, r, spec: RowClipSpec, seed):
    """Row-clipped Haar-random orthonormal start."""
    rng = np.random.default_rng(seed)
    return clip_rows(haar_orthonormal(d, r, rng), spec)


def instance(data, spec: RowClipSpec, r=None):
    return ModelInstance(
        name="one-bit",
        d=data.d,
        r=r if r is not None else 0,
        loss_grad=lambda f, stats=None: loss_grad(data, f, stats),
        project=lambda f: clip_rows(f, spec),
    )
