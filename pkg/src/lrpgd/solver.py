"""Projected gradient descent on factor matrices, with trace logging.

The update is F <- Pi(F - eta_t * grad(F)) for a model-supplied loss/gradient
pair and projection Pi.  Step sizes come from a schedule: either a constant
eta or the diminishing rule eta_t = 1 / (alpha * (t + gamma)).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InfeasibleStartError, ParameterError
from .factors import factor_dist, procrustes_distance, procrustes_residual, subspace_sin_dist

FEAS_TOL = 1e-8  # iterate-feasibility tolerance


@dataclass(frozen=True)
class Constant:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ParameterError(f"step size must be positive, got {self.eta}")

    def step(self, t):
        return self.eta


@dataclass(frozen=True)
class Diminishing:
    """eta_t = 1 / (alpha * (t + gamma))."""

    alpha: float
    gamma: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.gamma > 0):
            raise ParameterError("alpha and gamma must be positive")

    def step(self, t):
        return 1.0 / (self.alpha * (t + self.gamma))


def diminishing_schedule(alpha, lipschitz, cond_number):
    """Diminishing schedule with offset gamma = 20 kappa^2 L^2 / alpha^2.

    This is the step rule that gives the sublinear 1/t convergence guarantee
    under the local descent and Lipschitz conditions; it requires alpha <= L
    and kappa >= 1.
    """
    if not (alpha > 0 and lipschitz > 0 and cond_number > 0):
        raise ParameterError("alpha, lipschitz and cond_number must be positive")
    if alpha > lipschitz:
        raise ParameterError(f"need alpha <= lipschitz, got {alpha} > {lipschitz}")
    if cond_number < 1:
        raise ParameterError(f"condition number must be >= 1, got {cond_number}")
    gamma = 20.0 * cond_number**2 * lipschitz**2 / alpha**2
    return Diminishing(alpha=alpha, gamma=gamma)


def geometric_schedule(alpha, smoothness, cond_number, contraction_coeff):
    """Constant step c * alpha / (kappa^6 * beta^2) for the geometric regime.

    The coefficient c in (0, 1) is not pinned by the theory and must be
    supplied explicitly.
    """
    if not (alpha > 0 and smoothness > 0 and cond_number >= 1):
        raise ParameterError("alpha, smoothness positive and cond_number >= 1 required")
    if not 0 < contraction_coeff < 1:
        raise ParameterError("contraction coefficient must lie in (0, 1)")
    eta = contraction_coeff * alpha / (cond_number**6 * smoothness**2)
    return Constant(eta=eta)


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 500
    stop_rel_change: float = 0.0
    record_every: int = 1
    ground_truth: object = None
    store_factors: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if self.stop_rel_change < 0:
            raise ParameterError("stop_rel_change must be >= 0")
        if self.record_every < 1:
            raise ParameterError("record_every must be >= 1")


@dataclass
class SolverTrace:
    """Per-recorded-iteration metrics of one solver run.

    ``opt_err`` holds the rotation-invariant distance from each stored iterate
    to the final iterate; it is filled after the run and requires
    ``store_factors`` (otherwise it is NaN).  ``wall_ms`` is the elapsed wall
    clock at each record.  ``clamp_events`` counts saturating link-function
    clamps reported by the model, when it reports any.
    """

    iters: np.ndarray
    loss: np.ndarray
    step: np.ndarray
    dist: np.ndarray
    sin_sq: np.ndarray
    opt_err: np.ndarray
    wall_ms: np.ndarray
    clamp_events: int = 0
    factors: list = field(default_factory=list)

    def __len__(self):
        return int(self.iters.size)


def _metrics(f, gt):
    if gt is None:
        return np.nan, np.nan
    try:
        sin_sq = subspace_sin_dist(f, gt.factor)
    except Exception:
        sin_sq = np.nan
    return factor_dist(f, gt), sin_sq


def pgd(model, f0, schedule, opts=SolverOptions()):
    """Run projected gradient descent; returns ``(trace, final_factor)``.

    The start must already satisfy the model's constraints (within 1e-8); a
    non-finite loss or gradient raises :class:`DivergenceError` carrying the
    offending iteration.  Termination is at ``max_iters`` or when the iterate
    moves by at most ``stop_rel_change * max(1, ||F||_F)``.
    """
    f = np.array(f0, dtype=float)
    projected = model.project(f)
    if np.linalg.norm(projected - f) > FEAS_TOL * max(1.0, np.linalg.norm(f)):
        raise InfeasibleStartError("starting factor is outside the constraint set")

    gt = opts.ground_truth
    recs = {k: [] for k in ("t", "loss", "step", "dist", "sin", "ms")}
    factors = []
    clamps = 0
    t0 = time.perf_counter()

    def record(t, loss_val, eta, fcur):
        dist, sin_sq = _metrics(fcur, gt)
        recs["t"].append(t)
        recs["loss"].append(loss_val)
        recs["step"].append(eta)
        recs["dist"].append(dist)
        recs["sin"].append(sin_sq)
        recs["ms"].append((time.perf_counter() - t0) * 1e3)
        if opts.store_factors:
            factors.append(fcur.copy())

    stats = {}
    loss_val, grad = model.loss_grad(f, stats=stats)
    clamps += stats.get("clamped", 0)
    if not (np.isfinite(loss_val) and np.all(np.isfinite(grad))):
        raise DivergenceError("non-finite loss or gradient at the start", 0)
    record(0, loss_val, schedule.step(0), f)

    last_t = 0
    for t in range(opts.max_iters):
        eta = schedule.step(t)
        f_next = model.project(f - eta * grad)
        change = np.linalg.norm(f_next - f)
        ref = max(1.0, np.linalg.norm(f))
        f = f_next
        stats = {}
        loss_val, grad = model.loss_grad(f, stats=stats)
        clamps += stats.get("clamped", 0)
        if not (np.isfinite(loss_val) and np.all(np.isfinite(grad))):
            raise DivergenceError(f"non-finite loss or gradient at iteration {t + 1}", t + 1)
        last_t = t + 1
        if (t + 1) % opts.record_every == 0 or t + 1 == opts.max_iters:
            record(t + 1, loss_val, schedule.step(t + 1), f)
        if change <= opts.stop_rel_change * ref:
            if recs["t"][-1] != last_t:
                record(last_t, loss_val, schedule.step(last_t), f)
            break

    opt_err = np.full(len(recs["t"]), np.nan)
    if opts.store_factors and factors:
        final = factors[-1]
        # aligned-residual form: accurate below the closed form's
        # cancellation floor; the self-distance of the last iterate is 0
        opt_err = np.array([procrustes_residual(fa, final) for fa in factors[:-1]] + [0.0])

    trace = SolverTrace(
        iters=np.asarray(recs["t"], dtype=int),
        loss=np.asarray(recs["loss"], dtype=float),
        step=np.asarray(recs["step"], dtype=float),
        dist=np.asarray(recs["dist"], dtype=float),
        sin_sq=np.asarray(recs["sin"], dtype=float),
        opt_err=opt_err,
        wall_ms=np.asarray(recs["ms"], dtype=float),
        clamp_events=clamps,
        factors=factors,
    )
    return trace, f
