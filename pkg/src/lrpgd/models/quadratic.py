"""Unconstrained quadratic toy problem ||F - T||_F^2.

Used by the solver and probe test-beds: the curvature constants are known in
closed form (gradient 2 (F - T), so the descent slope is exactly 2 and the
gradient map is 2-Lipschitz).
"""

from __future__ import annotations

import numpy as np

from ..factors import GroundTruth, make_ground_truth
from .base import ModelInstance, identity_projection


def loss_grad(gt: GroundTruth, f, stats=None):
    diff = np.asarray(f, dtype=float) - gt.factor
    return float(np.sum(diff * diff)), 2.0 * diff


def instance(gt: GroundTruth):
    return ModelInstance(
        name="quadratic",
        d=gt.d,
        r=gt.r,
        loss_grad=lambda f, stats=None: loss_grad(gt, f, stats),
        project=identity_projection,
    )


def make(d, r, seed):
    """Ground truth plus bound instance for a random orthonormal target."""
    gt = make_ground_truth(d, r, seed)
    return gt, instance(gt)
