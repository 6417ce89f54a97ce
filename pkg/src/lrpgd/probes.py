"""Empirical estimation of local descent/Lipschitz/smoothness constants.

A probe samples feasible factors in a ball of radius rho around the ground
truth (rho must stay below sigma_r so the nearest valid factorization is
unique) and fits conservative envelopes:

* descent: the largest alpha with  <grad(F), F - A(F)>  >=  alpha * (||F -
  A(F)||^2 - eps^2)  across all samples, where A(F) is the aligned
  representative.  eps is first fixed as the smallest floor absorbing every
  non-descending sample, then alpha is the binding slope.
* Lipschitz: max ||grad(F)||_F / sigma_1, or the relaxed two-point form
  |<grad(F), F - F'>| / (sigma_1^2 + sigma_1 ||F - F'||) for the linear-loss
  models whose gradients do not shrink near the optimum.
* smoothness: the smallest beta with |<grad(F) - grad(F'), F - A(F)>| <=
  beta ||F - F'|| ||F - A(F)|| over sampled pairs (a share of the pairs is
  collinear with the target direction to expose the worst case).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import NonUniqueAlignmentError, ParameterError
from .factors import aligned_representative

DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class ProbeConfig:
    radius: float
    tau: float = 0.5
    samples: int = 200
    seed: int = 0

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError("probe radius must be positive")
        if not 0 < self.tau < 1:
            raise ParameterError("tau must lie in (0, 1)")
        if self.samples < 2:
            raise ParameterError("need at least 2 samples")


@dataclass(frozen=True)
class ProbeReport:
    """Fitted constants plus bookkeeping counts."""

    alpha: float
    eps: float
    lipschitz: float
    beta: float
    descent_violations: int  # samples with a non-descending gradient pairing
    alignment_failures: int
    samples_used: int
    relaxed_lipschitz: bool

    def to_dict(self):
        return asdict(self)


def _check_radius(gt, cfg):
    if cfg.radius >= gt.sigma_r:
        raise ParameterError(
            f"probe radius {cfg.radius} must stay below sigma_r {gt.sigma_r}; "
            "alignment would not be unique"
        )


def sample_neighborhood(model, gt, cfg, rng=None):
    """Feasible factors around the target: project(T + radius * u * E)."""
    _check_radius(gt, cfg)
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    out = []
    for _ in range(cfg.samples):
        direction = rng.standard_normal(gt.factor.shape)
        direction /= np.linalg.norm(direction)
        u = rng.uniform()
        out.append(model.project(gt.factor + cfg.radius * u * direction))
    return out


def probe_descent(model, gt, cfg):
    """Fit (alpha, eps) for the local descent inequality; returns a dict."""
    _check_radius(gt, cfg)
    rng = np.random.default_rng(cfg.seed)
    samples = sample_neighborhood(model, gt, cfg, rng)
    slopes = []  # (g, D) pairs
    align_failures = 0
    for f in samples:
        try:
            anchor = aligned_representative(f, gt)
        except NonUniqueAlignmentError:
            align_failures += 1
            continue
        _, grad = model.loss_grad(f)
        diff = f - anchor
        g = float(np.sum(grad * diff))
        dist_sq = float(np.sum(diff * diff))
        slopes.append((g, dist_sq))
    if not slopes:
        return {
            "alpha": float("nan"), "eps": float("nan"),
            "descent_violations": 0, "alignment_failures": align_failures,
            "samples_used": 0,
        }
    gs = np.array([s[0] for s in slopes])
    ds = np.array([s[1] for s in slopes])
    bad = gs <= 0
    eps_sq = float(np.max(ds[bad])) if np.any(bad) else 0.0
    active = ds > eps_sq + DENOM_FLOOR
    alpha = float(np.min(gs[active] / (ds[active] - eps_sq))) if np.any(active) else 0.0
    return {
        "alpha": alpha,
        "eps": float(np.sqrt(eps_sq)),
        "descent_violations": int(np.count_nonzero(bad)),
        "alignment_failures": align_failures,
        "samples_used": int(len(slopes)),
    }


def probe_smooth_lipschitz(model, gt, cfg, relaxed=False):
    """Fit the Lipschitz level and smoothness slope over sampled pairs."""
    _check_radius(gt, cfg)
    rng = np.random.default_rng(cfg.seed + 1)
    samples = sample_neighborhood(model, gt, cfg, rng)
    n = len(samples)
    partner = rng.permutation(n)
    sigma1 = gt.op_norm

    lipschitz = 0.0
    beta = 0.0
    grads = [model.loss_grad(f)[1] for f in samples]
    anchors = []
    for f in samples:
        try:
            anchors.append(aligned_representative(f, gt))
        except NonUniqueAlignmentError:
            anchors.append(None)

    for i, f in enumerate(samples):
        if not relaxed:
            lipschitz = max(lipschitz, float(np.linalg.norm(grads[i])) / sigma1)
        # independent partner plus a collinear partner toward the target,
        # which realizes the worst smoothness direction
        partners = [(samples[partner[i]], grads[partner[i]])]
        t = rng.uniform()
        collinear = gt.factor + t * (f - gt.factor)
        collinear = model.project(collinear)
        partners.append((collinear, model.loss_grad(collinear)[1]))
        for f2, g2 in partners:
            gap = f - f2
            gap_norm = float(np.linalg.norm(gap))
            if relaxed:
                val = abs(float(np.sum(grads[i] * gap)))
                lipschitz = max(lipschitz, val / (sigma1**2 + sigma1 * gap_norm))
            if anchors[i] is None or gap_norm < DENOM_FLOOR:
                continue
            to_anchor = f - anchors[i]
            anchor_norm = float(np.linalg.norm(to_anchor))
            if anchor_norm < DENOM_FLOOR:
                continue
            val = abs(float(np.sum((grads[i] - g2) * to_anchor)))
            beta = max(beta, val / (gap_norm * anchor_norm))
    return {"lipschitz": lipschitz, "beta": beta, "relaxed_lipschitz": relaxed}


def probe_model(model, gt, cfg, relaxed=False):
    """Run both probes and assemble a :class:`ProbeReport`."""
    descent = probe_descent(model, gt, cfg)
    smooth = probe_smooth_lipschitz(model, gt, cfg, relaxed=relaxed)
    return ProbeReport(
        alpha=descent["alpha"],
        eps=descent["eps"],
        lipschitz=smooth["lipschitz"],
        beta=smooth["beta"],
        descent_violations=descent["descent_violations"],
        alignment_failures=descent["alignment_failures"],
        samples_used=descent["samples_used"],
        relaxed_lipschitz=smooth["relaxed_lipschitz"],
    )
