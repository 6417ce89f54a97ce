"""Exact Euclidean projections onto the constraint sets used by the models.

Five projections: per-row l2 clipping, the l1 ball, column-wise l1 balls, the
box-constrained mass hyperplane ([0,1]^d with a fixed coordinate sum), and the
intersection of a spectral-norm ball with an l2,1 (sum of row norms) ball.

All of them are exact finite algorithms except the last, which intersects two
sets and is computed by Dykstra's corrected alternating scheme (plain
alternating projection finds a point in the intersection but not the nearest
one; Dykstra converges to the true Euclidean projection).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InfeasibleSetError, ParameterError
from .factors import as_factor


@dataclass(frozen=True)
class RowClipSpec:
    """Per-row l2 cap; rows longer than ``radius`` are rescaled onto it."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError(f"row radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class BoxSimplexSpec:
    """Coordinates in [0,1] with a fixed total mass."""

    mass: float

    def __post_init__(self):
        if not self.mass > 0:
            raise ParameterError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class SpectralL21Spec:
    """Spectral-norm cap intersected with a row-norm-sum (l2,1) cap."""

    spectral_radius: float
    l21_radius: float
    dykstra_max_iters: int = 500
    dykstra_tol: float = 1e-10

    def __post_init__(self):
        if not (self.spectral_radius > 0 and self.l21_radius > 0):
            raise ParameterError("both radii must be positive")


def row_clip_radius(mu, d, frob_norm):
    """Row cap sqrt(2 mu / d) * ||theta0||_F used by the incoherence-bounded sets."""
    return float(np.sqrt(2.0 * mu / d) * frob_norm)


def clip_rows(f, spec):
    """Rescale every row with l2 norm above the cap onto the cap; idempotent."""
    f = as_factor(f, "factor")
    norms = np.sqrt(np.einsum("ij,ij->i", f, f))
    scale = np.ones_like(norms)
    over = norms > spec.radius
    scale[over] = spec.radius / norms[over]
    return f * scale[:, None]


def project_l1_ball(v, radius):
    """Euclidean projection of a vector onto {||x||_1 <= radius}.

    Exact sort-and-soft-threshold (O(n log n)); input returned unchanged when
    already feasible.
    """
    if not radius > 0:
        raise ParameterError(f"l1 radius must be positive, got {radius}")
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    lam = _l1_threshold(a, radius)
    return np.sign(v) * np.maximum(a - lam, 0.0)


def _l1_threshold(abs_v, radius):
    """Soft-threshold level lambda with sum(max(|v| - lambda, 0)) == radius."""
    u = np.sort(abs_v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, u.size + 1)
    rho = np.nonzero(u * idx > css - radius)[0][-1]
    return (css[rho] - radius) / (rho + 1.0)


def project_columns_l1(s, radii):
    """Project each column of a square matrix onto its own l1 ball."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {s.shape}")
    radii = np.asarray(radii, dtype=float)
    if radii.shape != (s.shape[1],):
        raise DimensionError(
            f"need one radius per column: {radii.shape} vs {s.shape[1]} columns"
        )
    if np.any(radii <= 0):
        raise ParameterError("column radii must be positive")
    out = np.empty_like(s)
    abs_s = np.abs(s)
    sums = abs_s.sum(axis=0)
    for j in range(s.shape[1]):
        if sums[j] <= radii[j]:
            out[:, j] = s[:, j]
        else:
            lam = _l1_threshold(abs_s[:, j], radii[j])
            out[:, j] = np.sign(s[:, j]) * np.maximum(abs_s[:, j] - lam, 0.0)
    return out


def project_box_simplex(v, spec):
    """Nearest point of {x in [0,1]^d : sum x = mass} to ``v``.

    The optimality system is x_i = clip(v_i - lam, 0, 1) with the scalar lam
    chosen so the coordinates sum to the mass.  lam is located by an exact
    sweep over the sorted breakpoints {v_i, v_i - 1} (O(d log d)), with a
    bisection fallback for degenerate ties.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    d = v.size
    if spec.mass > d:
        raise InfeasibleSetError(f"mass {spec.mass} exceeds dimension {d}")
    k = float(spec.mass)

    vs = np.sort(v)
    prefix = np.concatenate(([0.0], np.cumsum(vs)))

    def mass_at(lam):
        # sum_i clip(v_i - lam, 0, 1), vectorized over an array of lam values
        lam = np.atleast_1d(lam)
        hi = np.searchsorted(vs, lam + 1.0, side="left")
        lo = np.searchsorted(vs, lam, side="right")
        n_ones = d - hi
        mid_sum = (prefix[hi] - prefix[lo]) - lam * (hi - lo)
        return n_ones + mid_sum

    bp = np.unique(np.concatenate((v, v - 1.0)))
    masses = mass_at(bp)
    # mass_at is nonincreasing: d for lam <= min(v)-1, 0 for lam >= max(v).
    # Find the first breakpoint whose mass has dropped to <= k.
    j = int(np.searchsorted(-masses, -k, side="left"))
    if j == 0:
        # masses[0] == d, so this means k == d: saturate everything
        lam = bp[0]
    elif j >= bp.size:
        lam = bp[-1]
    else:
        m_hi, m_lo = masses[j - 1], masses[j]
        if m_hi == m_lo:
            lam = bp[j - 1]
        else:
            t = (m_hi - k) / (m_hi - m_lo)
            lam = bp[j - 1] + t * (bp[j] - bp[j - 1])

    # polish: the sweep is exact in real arithmetic; a short bisection guards
    # against roundoff and tie degeneracies
    if abs(float(mass_at(lam)[0]) - k) > 1e-12 * max(1.0, k):
        lo, hi = bp[0] - 1.0, bp[-1]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(mass_at(mid)[0]) > k:
                lo = mid
            else:
                hi = mid
        lam = 0.5 * (lo + hi)

    return np.clip(v - lam, 0.0, 1.0)


def clip_spectral(f, radius):
    """Projection onto {||F||_op <= radius}: clip singular values."""
    u, s, vt = np.linalg.svd(f, full_matrices=False)
    if s.size == 0 or s[0] <= radius:
        return np.asarray(f, dtype=float).copy()
    return (u * np.minimum(s, radius)) @ vt


def project_l21_rows(f, radius):
    """Projection onto {sum_i ||row_i||_2 <= radius}: group soft-threshold.

    Row directions are preserved; the vector of row norms is projected onto
    the l1 ball with the exact sort-based threshold.
    """
    f = np.asarray(f, dtype=float)
    norms = np.sqrt(np.einsum("ij,ij->i", f, f))
    if norms.sum() <= radius:
        return f.copy()
    shrunk = project_l1_ball(norms, radius)
    scale = np.zeros_like(norms)
    pos = norms > 0
    scale[pos] = shrunk[pos] / norms[pos]
    return f * scale[:, None]


def project_spectral_l21_with_info(f, spec):
    """Dykstra projection onto the spectral cap intersected with the l2,1 ball.

    Returns ``(projection, converged)``.  Alternates singular-value clipping
    and the row-group soft-threshold with Dykstra's correction increments;
    stops when a full cycle moves the iterate by less than ``dykstra_tol`` or
    after ``dykstra_max_iters`` cycles (then ``converged`` is False and the
    last iterate is returned).
    """
    f = as_factor(f, "factor")
    x = f.copy()
    p = np.zeros_like(f)
    q = np.zeros_like(f)
    converged = False
    for _ in range(spec.dykstra_max_iters):
        y = clip_spectral(x + p, spec.spectral_radius)
        p = x + p - y
        x_new = project_l21_rows(y + q, spec.l21_radius)
        q = y + q - x_new
        if np.linalg.norm(x_new - x) < spec.dykstra_tol:
            x = x_new
            converged = True
            break
        x = x_new
    return x, converged


def project_spectral_l21(f, spec):
    """As :func:`project_spectral_l21_with_info`, warning on non-convergence."""
    out, converged = project_spectral_l21_with_info(f, spec)
    if not converged:
        warnings.warn(
            f"Dykstra projection did not converge in {spec.dykstra_max_iters} cycles",
            RuntimeWarning,
            stacklevel=2,
        )
    return out
