"""Planted densest subgraph: recover a hidden vertex cluster from one graph.

A size-k cluster is planted in a d-vertex graph; edges appear with
probability p inside the cluster and q < p elsewhere (no self-loops).  With
S = A - ((p+q)/2) * ones, the rank-1 factorized objective is

    loss(F) = -F^T S F,        gradient -2 S F,

optimized over the box-mass set {F in [0,1]^d, sum F = k}.  S is never
materialized: mat-vecs use the sparse adjacency plus a rank-one correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import DegenerateInitError, DimensionError, ParameterError
from ..factors import GroundTruth, as_factor, factor_dist
from ..projections import BoxSimplexSpec, project_box_simplex
from .base import ModelInstance

RECOVERY_THRESHOLD = 2e-3

_SAMPLE_BLOCK = 512  # rows per sampling block, keeps d^2 draws memory-bounded


@dataclass(frozen=True)
class PlantedGraph:
    d: int
    cluster_size: int
    p_in: float
    q_out: float
    adjacency: sparse.csr_matrix  # symmetric 0/1, zero diagonal

    @property
    def shift(self):
        return 0.5 * (self.p_in + self.q_out)


def generate(d, k, p, q, seed):
    """Sample a planted instance; returns ``(PlantedGraph, GroundTruth)``."""
    if k > d:
        raise ParameterError(f"cluster size {k} exceeds vertex count {d}")
    # q = 0 is allowed (empty background), q >= p is not
    if not (0 <= q < p <= 1):
        raise ParameterError(f"need 0 <= q < p <= 1, got p={p}, q={q}")
    rng = np.random.default_rng(seed)
    members = np.sort(rng.choice(d, size=k, replace=False))
    in_cluster = np.zeros(d, dtype=bool)
    in_cluster[members] = True

    rows, cols = [], []
    for start in range(0, d, _SAMPLE_BLOCK):
        stop = min(start + _SAMPLE_BLOCK, d)
        block = rng.random((stop - start, d))
        probs = np.where(
            in_cluster[start:stop, None] & in_cluster[None, :], p, q
        )
        hit = block < probs
        # keep strictly-upper pairs only (i < j); diagonal stays empty
        bi, bj = np.nonzero(hit)
        bi = bi + start
        keep = bi < bj
        rows.append(bi[keep])
        cols.append(bj[keep])
    ui = np.concatenate(rows)
    uj = np.concatenate(cols)
    data = np.ones(2 * ui.size)
    adj = sparse.csr_matrix(
        (data, (np.concatenate([ui, uj]), np.concatenate([uj, ui]))), shape=(d, d)
    )
    indicator = in_cluster.astype(float)[:, None]
    gt = GroundTruth.from_factor(indicator)
    return PlantedGraph(d=d, cluster_size=k, p_in=p, q_out=q, adjacency=adj), gt


def load_edge_list(path, d):
    """Adjacency from a text file of 0-indexed undirected 'i j' pairs."""
    pairs = np.loadtxt(path, dtype=np.int64, ndmin=2)
    if pairs.shape[1] != 2:
        raise DimensionError("edge list must have two columns")
    i, j = pairs[:, 0], pairs[:, 1]
    if np.any(i < 0) or np.any(j < 0) or np.any(i >= d) or np.any(j >= d):
        raise DimensionError(f"edge endpoints out of range for d={d}")
    keep = i != j
    i, j = i[keep], j[keep]
    adj = sparse.csr_matrix(
        (np.ones(2 * i.size), (np.concatenate([i, j]), np.concatenate([j, i]))),
        shape=(d, d),
    )
    adj.data[:] = 1.0  # duplicates were summed during construction
    return adj


def from_adjacency(adj, k, p, q):
    adj = sparse.csr_matrix(adj)
    if adj.shape[0] != adj.shape[1]:
        raise DimensionError("adjacency must be square")
    if not p > q:
        raise ParameterError(f"need p > q, got p={p}, q={q}")
    return PlantedGraph(d=adj.shape[0], cluster_size=k, p_in=p, q_out=q, adjacency=adj)


def _shifted_matvec(g, v):
    return g.adjacency @ v - g.shift * np.sum(v, axis=0)


def loss_grad(g, f, stats=None):
    f = as_factor(f)
    if f.shape[0] != g.d:
        raise DimensionError(f"factor rows {f.shape[0]} != vertex count {g.d}")
    if f.shape[1] != 1:
        raise ParameterError("the planted model is rank-1")
    sf = _shifted_matvec(g, f)
    return float(-np.sum(f * sf)), -2.0 * sf


def dense_shift(g):
    """Materialized S = A - shift * ones; test/diagnostic use at small d."""
    return g.adjacency.toarray() - g.shift


def project(f, spec: BoxSimplexSpec):
    f = as_factor(f)
    return project_box_simplex(f[:, 0], spec)[:, None]


def default_spec(g):
    return BoxSimplexSpec(mass=float(g.cluster_size))


def init_svd(g, spec=None, max_iters=1000, tol=1e-7):
    """Leading singular direction of the q-recentered adjacency, projected.

    Power iteration on (A - q ones)^2 (matrix-free), sign fixed so the vector
    has nonnegative sum.  The unit vector is rescaled to the indicator's
    norm sqrt(k) before the box-mass projection; without the rescaling the
    projection of a unit-norm vector spreads the mass almost uniformly.

    The successive-iterate tolerance only needs to pin the direction to far
    below the projection's quantization, so it is kept loose enough that
    signal-free graphs (near-tied noise eigenvalues) still converge inside
    the step budget.
    """
    spec = spec if spec is not None else default_spec(g)

    def centered(v):
        return g.adjacency @ v - g.q_out * np.sum(v)

    v = np.full(g.d, 1.0 / np.sqrt(g.d))
    for _ in range(max_iters):
        w = centered(centered(v))
        norm = np.linalg.norm(w)
        if norm == 0:
            raise DegenerateInitError("power iteration collapsed to zero")
        w /= norm
        if np.linalg.norm(w - v) < tol:
            v = w
            break
        v = w
    else:
        raise DegenerateInitError(f"power iteration did not converge in {max_iters} steps")
    if np.sum(v) < 0:
        v = -v
    return project_box_simplex(np.sqrt(g.cluster_size) * v, spec)[:, None]


def exact_recovery(f, gt, threshold=RECOVERY_THRESHOLD):
    """Whether the factor is within the recovery distance of the indicator."""
    return bool(factor_dist(f, gt) <= threshold)


def instance(g, spec=None):
    spec = spec if spec is not None else default_spec(g)
    return ModelInstance(
        name="planted",
        d=g.d,
        r=1,
        loss_grad=lambda f, stats=None: loss_grad(g, f, stats),
        project=lambda f: project(f, spec),
    )
