"""Shared independent oracles used across test modules.

These deliberately avoid the library's own algorithms: projections are
re-derived through scalar bisection on the dual variable, distances through
grid search, so each test cross-checks two routes.
"""

import numpy as np


def bisect_scalar(fn, lo, hi, iters=200):
    """Root of a monotone nonincreasing fn on [lo, hi] by plain bisection."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def l1_project_bisection(v, radius):
    """l1-ball projection via bisection on the soft-threshold level."""
    a = np.abs(v)
    if a.sum() <= radius:
        return np.asarray(v, dtype=float).copy()
    lam = bisect_scalar(lambda t: np.maximum(a - t, 0.0).sum() - radius, 0.0, a.max())
    return np.sign(v) * np.maximum(a - lam, 0.0)


def box_simplex_bisection(v, mass):
    """Box-mass projection via bisection on the shift."""
    v = np.asarray(v, dtype=float)
    lam = bisect_scalar(
        lambda t: np.clip(v - t, 0.0, 1.0).sum() - mass, v.min() - 1.0, v.max()
    )
    return np.clip(v - lam, 0.0, 1.0)


def l2_l1_project_kkt(v, s, radius):
    """Projection onto the l2(s)-ball intersected with the l1(radius)-ball.

    Stationarity gives x = t * soft(v, lam) with t normalizing the l2 norm to
    s when that cap binds; lam >= 0 is found by bisection on the l1 norm of
    the normalized point.
    """
    v = np.asarray(v, dtype=float)

    def l2cap(x):
        nrm = np.linalg.norm(x)
        return x if nrm <= s else x * (s / nrm)

    cand = l2cap(v)
    if np.abs(cand).sum() <= radius + 1e-12:
        return cand
    cand = l1_project_bisection(v, radius)
    if np.linalg.norm(cand) <= s + 1e-12:
        return cand

    def l1_of(lam):
        y = np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return -radius
        return np.abs(y).sum() * (s / nrm) - radius

    lam = bisect_scalar(l1_of, 0.0, np.abs(v).max(), iters=300)
    y = np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)
    return y * (s / np.linalg.norm(y))


def brute_force_factor_dist(f, target, grid_points=20001):
    """min_Q ||f - target Q||_F over a dense grid of O(r) for r in {1, 2}."""
    f = np.asarray(f, dtype=float)
    target = np.asarray(target, dtype=float)
    r = f.shape[1]
    if r == 1:
        return min(np.linalg.norm(f - target), np.linalg.norm(f + target))
    if r != 2:
        raise ValueError("grid oracle only covers r in {1, 2}")
    phis = np.linspace(0.0, 2.0 * np.pi, grid_points)
    c, s = np.cos(phis), np.sin(phis)
    best = np.inf
    for refl in (1.0, -1.0):
        # Q = rotation(phi) @ diag(1, refl)
        qs = np.empty((grid_points, 2, 2))
        qs[:, 0, 0] = c
        qs[:, 1, 0] = s
        qs[:, 0, 1] = -s * refl
        qs[:, 1, 1] = c * refl
        cands = np.einsum("ij,njk->nik", target, qs)
        best = min(best, np.sqrt(((f[None] - cands) ** 2).sum(axis=(1, 2))).min())
    return float(best)
