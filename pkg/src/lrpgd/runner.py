"""Experiment engine: build model instances from configs and run commands.

Single runs, parameter sweeps (zipped point lists with per-point aggregates)
and phase diagrams (recovery frequency per cell) all route through
:func:`run_single`.  Rows of sweeps and phase diagrams execute in a thread
pool sized by the ``LRPGD_THREADS`` environment variable; every row derives
its own seed from the master seed by counters, so results are byte-identical
regardless of pool size, and output rows are written in point order.
"""

from __future__ import annotations

import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import factors as fx
from .config import config_hash, eval_rule, validate
from .errors import ConfigError, LrpgdError
from .models import completion, decomposition, onebit, planted, quadratic, regression, sparse_pca
from .probes import ProbeConfig, probe_model
from .projections import RowClipSpec, clip_rows, project_box_simplex, row_clip_radius
from .seeds import child_seed
from .solver import Constant, SolverOptions, pgd

RECOVERY_THRESHOLD = 2e-3

TRACE_HEADER = "iter,loss,step,dist,sin_sq,opt_err,ms"


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x != x:
        return "nan"
    return repr(x)


def _threads():
    raw = os.environ.get("LRPGD_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return max(1, n) if n else min(8, os.cpu_count() or 1)


def resolve_sigma(cfg):
    if cfg.get("sigma") is not None:
        return float(cfg["sigma"])
    rule = cfg.get("sigma_rule")
    if rule is None:
        return 0.0
    return eval_rule(rule, r=cfg.get("r"), d=cfg.get("d"))


@dataclass
class BuiltRun:
    instance: object
    gt: object
    f0: np.ndarray
    step: object
    extras: dict


def _default_init(model):
    return {
        "completion": "svd",
        "regression": "svd",
        "sparse-pca": "diag-threshold",
        "planted": "svd",
        "one-bit": "random",
        "decomposition": "hard-threshold",
    }[model]


def _need(cfg, key):
    value = cfg.get(key)
    if value is None:
        raise ConfigError(f"model {cfg.get('model')!r} needs the {key!r} parameter")
    return value


def build_run(cfg, seed):
    """Instantiate data, ground truth, start and step size for one run."""
    model = cfg["model"]
    init = cfg.get("init") or _default_init(model)
    sigma = resolve_sigma(cfg)
    d = int(_need(cfg, "d"))
    r = int(cfg.get("r", 1))
    step = cfg.get("step")

    if model == "completion":
        p = float(_need(cfg, "p"))
        data, gt = completion.generate(d, r, p, sigma, seed)
        mu = float(cfg.get("mu") or gt.mu)
        if init == "svd":
            raw = completion.init_svd_factor(data, r)
        elif init == "random":
            raw = fx.random_orthonormal(d, r, child_seed(seed, 101))
        else:
            raise ConfigError(f"init {init!r} not supported for completion")
        spec = RowClipSpec(row_clip_radius(mu, d, np.linalg.norm(raw)))
        f0 = clip_rows(raw, spec)
        inst = completion.instance(data, spec, r)
        # the protocol step 0.5/p is stated for the unscaled half-triangle
        # loss; our loss carries the 1/p rescaling and sums the symmetric
        # index set, so the identical trajectory uses (0.5/p)*(p/2) = 0.25
        eta = float(step) if step is not None else 0.25
        return BuiltRun(inst, gt, f0, Constant(eta), {"data": data, "spec": spec})

    if model == "one-bit":
        p = float(_need(cfg, "p"))
        if sigma <= 0:
            raise ConfigError("one-bit model needs a positive sigma / sigma_rule")
        link = cfg.get("link", "logistic")
        data, gt = onebit.generate(d, r, p, sigma, link, seed)
        mu = float(cfg.get("mu") or gt.mu)
        if init == "random":
            raw = fx.random_orthonormal(d, r, child_seed(seed, 101))
        else:
            raise ConfigError(f"init {init!r} not supported for one-bit")
        spec = RowClipSpec(row_clip_radius(mu, d, np.linalg.norm(raw)))
        f0 = clip_rows(raw, spec)
        inst = onebit.instance(data, spec, r)
        eta = float(step) if step is not None else 0.5 * sigma**2 / p
        return BuiltRun(inst, gt, f0, Constant(eta), {"data": data, "spec": spec})

    if model == "regression":
        n = int(_need(cfg, "n"))
        data, gt = regression.generate(d, r, n, sigma, seed)
        if init == "svd":
            f0 = regression.init_svd(data, r)
        elif init == "random":
            f0 = fx.random_orthonormal(d, r, child_seed(seed, 101))
        else:
            raise ConfigError(f"init {init!r} not supported for regression")
        inst = regression.instance(data, r)
        if step is not None:
            eta = float(step)
        else:
            top = np.linalg.svd(f0, compute_uv=False)[0]
            eta = float(cfg.get("step_coeff", 0.25)) / max(top**2, 1e-12)
        return BuiltRun(inst, gt, f0, Constant(eta), {"data": data})

    if model == "sparse-pca":
        k = int(_need(cfg, "k"))
        gamma = float(_need(cfg, "gamma"))
        n = int(_need(cfg, "n"))
        smodel = sparse_pca.generate(d, r, k, gamma, n, seed)
        gt = smodel.ground_truth
        spec = sparse_pca.default_spec(smodel)
        if init == "diag-threshold":
            f0 = sparse_pca.init_diag_threshold(smodel, r, spec)
        elif init == "perturbed":
            f0 = sparse_pca.init_perturbed(smodel, child_seed(seed, 101), spec)
        elif init == "random":
            f0 = sparse_pca.project(fx.random_orthonormal(d, r, child_seed(seed, 101)), spec)
        else:
            raise ConfigError(f"init {init!r} not supported for sparse-pca")
        inst = sparse_pca.instance(smodel, spec)
        eta = float(step) if step is not None else 0.5 * gamma / (gamma + 1.0) ** 2
        return BuiltRun(inst, gt, f0, Constant(eta), {"model": smodel, "spec": spec})

    if model == "planted":
        k = int(_need(cfg, "k"))
        p = float(_need(cfg, "p"))
        q = float(_need(cfg, "q"))
        if cfg.get("graph_file"):
            # non-synthetic run: adjacency from an edge-list text file; no
            # ground truth, so truth-relative metrics come out as NaN
            adj = planted.load_edge_list(cfg["graph_file"], d)
            graph = planted.from_adjacency(adj, k, p, q)
            gt = None
        else:
            graph, gt = planted.generate(d, k, p, q, seed)
        spec = planted.default_spec(graph)
        if init == "svd":
            f0 = planted.init_svd(graph, spec)
        elif init == "random":
            v = np.abs(fx.random_orthonormal(d, 1, child_seed(seed, 101))[:, 0])
            f0 = project_box_simplex(v, spec)[:, None]
        else:
            raise ConfigError(f"init {init!r} not supported for planted")
        inst = planted.instance(graph, spec)
        eta = float(step) if step is not None else 0.1 / ((p - q) * k)
        return BuiltRun(inst, gt, f0, Constant(eta), {"graph": graph, "spec": spec})

    if model == "decomposition":
        k = int(_need(cfg, "k"))
        spike = float(cfg.get("spike_scale", 10.0))
        data, gt, spikes = decomposition.generate(d, r, k, spike, sigma, seed)
        mu = float(cfg.get("mu") or gt.mu)
        if init == "hard-threshold":
            raw = decomposition.init_hard_threshold_factor(data, r, mu)
        elif init == "random":
            raw = fx.random_orthonormal(d, r, child_seed(seed, 101))
        else:
            raise ConfigError(f"init {init!r} not supported for decomposition")
        spec = RowClipSpec(row_clip_radius(mu, d, np.linalg.norm(raw)))
        f0 = clip_rows(raw, spec)
        inst = decomposition.instance(data, spec, r)
        # the protocol's eta = 1 pairs with a half-scale gradient convention;
        # against the exact gradient of 0.5*min_S||Y - FF^T - S||^2 the local
        # curvature is ~4*sigma_1^2, so the stable equivalent is eta = 0.5
        eta = float(step) if step is not None else 0.5
        return BuiltRun(inst, gt, f0, Constant(eta), {"data": data, "spec": spec, "spikes": spikes})

    raise ConfigError(f"unknown model {model!r}")


def run_single(cfg, seed):
    """One full solve; returns ``(record_dict, trace)``."""
    built = build_run(cfg, seed)
    opts = SolverOptions(
        max_iters=int(cfg["iters"]),
        stop_rel_change=float(cfg.get("stop_rel_change", 0.0)),
        record_every=int(cfg.get("record_every", 1)),
        ground_truth=built.gt,
        store_factors=bool(cfg.get("store_factors", False)),
    )
    t0 = time.perf_counter()
    trace, final = pgd(built.instance, built.f0, built.step, opts)
    wall_ms = (time.perf_counter() - t0) * 1e3
    if built.gt is None:
        dist = sin_sq = per_entry = float("nan")
        recovered = False
    else:
        dist = fx.factor_dist(final, built.gt)
        try:
            sin_sq = fx.subspace_sin_dist(final, built.gt.factor)
        except LrpgdError:
            sin_sq = float("nan")
        per_entry = fx.per_entry_error(final, built.gt)
        recovered = bool(dist <= RECOVERY_THRESHOLD)
    record = {
        "config_hash": config_hash(cfg),
        "seed": int(seed),
        "dist": float(dist),
        "sin_sq": float(sin_sq),
        "per_entry": float(per_entry),
        "loss": float(trace.loss[-1]),
        "recovered": recovered,
        "iterations": int(trace.iters[-1]),
        "wall_ms": wall_ms,
        "clamp_events": int(trace.clamp_events),
    }
    return record, trace


def write_trace_csv(path, trace, timing=False):
    lines = [TRACE_HEADER]
    for i in range(len(trace)):
        ms = trace.wall_ms[i] if timing else 0.0
        lines.append(",".join([
            _fmt(int(trace.iters[i])),
            _fmt(trace.loss[i]),
            _fmt(trace.step[i]),
            _fmt(trace.dist[i]),
            _fmt(trace.sin_sq[i]),
            _fmt(trace.opt_err[i]),
            _fmt(ms),
        ]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_run(cfg, out_dir):
    """Single experiment: trace CSV plus a run-record JSON."""
    validate(cfg)
    os.makedirs(out_dir, exist_ok=True)
    seed = int(cfg.get("master_seed", 0))
    cfg = dict(cfg, store_factors=bool(cfg.get("store_factors", False)))
    record, trace = run_single(cfg, seed)
    tag = f"{record['config_hash']}_s{seed}"
    trace_path = os.path.join(out_dir, f"trace_{tag}.csv")
    write_trace_csv(trace_path, trace, timing=bool(cfg.get("timing", False)))
    if not cfg.get("timing", False):
        record = dict(record, wall_ms=0.0)
    record["trace_path"] = os.path.basename(trace_path)
    run_path = os.path.join(out_dir, f"run_{tag}.json")
    write_json(run_path, record)
    print(f"run {tag}: dist={_fmt(record['dist'])} sin_sq={_fmt(record['sin_sq'])} "
          f"loss={_fmt(record['loss'])} recovered={record['recovered']}")
    return record, trace_path, run_path


def _sweep_points(cfg):
    keys = sorted(k for k in cfg if k.startswith("sweep_") and k != "sweep_x")
    if not keys:
        raise ConfigError("sweep needs sweep_<param> lists")
    lists = {k[len("sweep_"):]: list(cfg[k]) for k in keys}
    lengths = {len(v) for v in lists.values()}
    if len(lengths) != 1:
        raise ConfigError("sweep_<param> lists must share one length")
    npts = lengths.pop()
    points = []
    for i in range(npts):
        points.append({param: vals[i] for param, vals in lists.items()})
    return points


def _point_x(cfg, point_cfg):
    rule = cfg.get("sweep_x")
    if rule is None:
        return float("nan")
    return eval_rule(rule, **{k: point_cfg.get(k) for k in ("r", "d", "p", "n", "k", "gamma")})


SWEEP_HEADER = "point,x,seed,dist,sin_sq,per_entry,loss,recovered,iters,ms"
AGG_HEADER = "point,x,metric,n,mean,se"


def cmd_sweep(cfg, out_dir):
    """Grid of runs: one CSV row per (point, seed) plus per-point aggregates."""
    validate(cfg)
    os.makedirs(out_dir, exist_ok=True)
    master = int(cfg.get("master_seed", 0))
    n_seeds = int(cfg.get("seeds", 1))
    metric = cfg.get("metric", "dist")
    points = _sweep_points(cfg)
    timing = bool(cfg.get("timing", False))

    jobs = []
    for pi, point in enumerate(points):
        point_cfg = dict(cfg)
        point_cfg.update(point)
        for si in range(n_seeds):
            jobs.append((pi, point_cfg, child_seed(master, pi, si)))

    def work(job):
        pi, point_cfg, seed = job
        try:
            record, _ = run_single(point_cfg, seed)
            return pi, seed, record, None
        except LrpgdError as exc:
            return pi, seed, None, str(exc)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(work, jobs))

    rows = [SWEEP_HEADER]
    by_point = {pi: [] for pi in range(len(points))}
    failures = 0
    for (pi, seed, record, err) in results:
        x = _point_x(cfg, {**cfg, **points[pi]})
        if record is None:
            failures += 1
            print(f"sweep point {pi} seed {seed} failed: {err}", file=sys.stderr)
            rows.append(",".join([
                _fmt(pi), _fmt(x), _fmt(seed), "nan", "nan", "nan", "nan", "0", "0", "0.0",
            ]))
            continue
        by_point[pi].append(record)
        rows.append(",".join([
            _fmt(pi), _fmt(x), _fmt(seed),
            _fmt(record["dist"]), _fmt(record["sin_sq"]), _fmt(record["per_entry"]),
            _fmt(record["loss"]), _fmt(record["recovered"]), _fmt(record["iterations"]),
            _fmt(record["wall_ms"] if timing else 0.0),
        ]))

    agg = [AGG_HEADER]
    for pi in range(len(points)):
        vals = np.array([rec[_metric_key(metric)] for rec in by_point[pi]], dtype=float)
        x = _point_x(cfg, {**cfg, **points[pi]})
        n = vals.size
        mean = float(np.mean(vals)) if n else float("nan")
        se = float(np.std(vals, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        agg.append(",".join([_fmt(pi), _fmt(x), metric, _fmt(n), _fmt(mean), _fmt(se)]))

    tag = config_hash(cfg)
    rows_path = os.path.join(out_dir, f"sweep_{tag}.csv")
    agg_path = os.path.join(out_dir, f"sweep_{tag}_agg.csv")
    with open(rows_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
    with open(agg_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(agg) + "\n")
    print(f"sweep {tag}: {len(points)} points x {n_seeds} seeds, {failures} failures")
    return rows_path, agg_path


def _metric_key(metric):
    if metric not in ("dist", "sin_sq", "per_entry", "loss"):
        raise ConfigError(f"unknown metric {metric!r}")
    return metric


PHASE_HEADER = "control,size,frequency,trials,failures"


def cmd_phase(cfg, out_dir):
    """Recovery-frequency grid over (control value, problem size)."""
    validate(cfg)
    os.makedirs(out_dir, exist_ok=True)
    master = int(cfg.get("master_seed", 0))
    n_seeds = int(cfg.get("seeds", 1))
    param = cfg.get("phase_param")
    values = cfg.get("phase_values")
    sizes = cfg.get("phase_sizes")
    if not (param and values and sizes):
        raise ConfigError("phase needs phase_param, phase_values and phase_sizes")
    rule = cfg.get("phase_value_rule", "identity")

    cells = []
    for ci, size in enumerate(sizes):
        for vi, value in enumerate(values):
            cell_cfg = dict(cfg)
            cell_cfg["d"] = int(size)
            if rule == "over_d":
                cell_cfg[param] = float(value) / float(size)
            elif rule == "times_d":
                cell_cfg[param] = int(round(float(value) * float(size)))
            elif rule == "identity":
                cell_cfg[param] = value
            else:
                raise ConfigError(f"unknown phase_value_rule {rule!r}")
            for derived, key in (("q_rule", "q"), ("k_rule", "k")):
                if cfg.get(derived):
                    val = eval_rule(cfg[derived], p=cell_cfg.get("p"), d=cell_cfg.get("d"))
                    cell_cfg[key] = val if key == "q" else int(round(val))
            cells.append((ci, vi, value, size, cell_cfg))

    jobs = []
    for cell_index, (ci, vi, value, size, cell_cfg) in enumerate(cells):
        for si in range(n_seeds):
            jobs.append((cell_index, cell_cfg, child_seed(master, ci, vi, si)))

    def work(job):
        cell_index, cell_cfg, seed = job
        try:
            record, _ = run_single(cell_cfg, seed)
            return cell_index, bool(record["recovered"]), False
        except LrpgdError:
            return cell_index, False, True

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(work, jobs))

    recovered = {i: 0 for i in range(len(cells))}
    failed = {i: 0 for i in range(len(cells))}
    for cell_index, rec, fail in results:
        recovered[cell_index] += int(rec)
        failed[cell_index] += int(fail)

    lines = [PHASE_HEADER]
    for cell_index, (ci, vi, value, size, _) in enumerate(cells):
        freq = recovered[cell_index] / float(n_seeds)
        lines.append(",".join([
            _fmt(float(value)), _fmt(int(size)), _fmt(freq), _fmt(n_seeds),
            _fmt(failed[cell_index]),
        ]))
    tag = config_hash(cfg)
    path = os.path.join(out_dir, f"phase_{tag}.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"phase {tag}: {len(cells)} cells x {n_seeds} trials")
    return path


# --- desk registry for gradcheck / probe ---------------------------------

DESK = {
    "completion": {"model": "completion", "d": 60, "r": 3, "p": 0.3, "sigma": 0.01, "iters": 50},
    "regression": {"model": "regression", "d": 30, "r": 2, "n": 500, "sigma": 0.05, "iters": 50},
    "sparse-pca": {"model": "sparse-pca", "d": 80, "r": 2, "k": 6, "gamma": 4.0, "n": 600, "iters": 50},
    "planted": {"model": "planted", "d": 80, "k": 20, "p": 0.6, "q": 0.15, "iters": 50},
    "one-bit": {"model": "one-bit", "d": 60, "r": 2, "p": 0.5, "sigma_rule": "2*r/d", "iters": 50},
    "decomposition": {"model": "decomposition", "d": 60, "r": 3, "k": 4, "spike_scale": 10.0, "sigma": 0.0, "iters": 50},
}

# probe radii: the initialization-ball radii the corollaries ask for,
# expressed as functions of the ground truth
PROBE_RADII = {
    "completion": lambda gt: 0.2 * gt.op_norm,
    "regression": lambda gt: 0.3 * gt.sigma_r,
    "sparse-pca": lambda gt: 0.25,
    "planted": lambda gt: 0.2 * np.sqrt(gt.factor.sum()),
    "one-bit": lambda gt: 0.2 * gt.sigma_r,
    "decomposition": lambda gt: 0.2,
}

RELAXED_LIPSCHITZ = {"sparse-pca", "planted"}


def desk_built(model_name, seed):
    if model_name == "quadratic":
        gt, inst = quadratic.make(8, 2, seed)
        return BuiltRun(inst, gt, gt.factor.copy(), Constant(0.25), {})
    if model_name not in DESK:
        raise ConfigError(f"unknown model {model_name!r}")
    return build_run(dict(DESK[model_name]), seed)


def gradcheck_model(model_name, seed, points=10, directions=3, h=None):
    """Directional central-difference validation of a model's gradient."""
    built = desk_built(model_name, seed)
    rng = np.random.default_rng(child_seed(seed, 7))
    shape = built.f0.shape
    if h is None:
        # the decomposition loss is C^1 but only piecewise C^2 (inner l1
        # projection changes faces), so the central difference needs a small h
        h = 1e-6 if model_name == "decomposition" else 1e-4
    worst = 0.0
    for _ in range(points):
        direction = rng.standard_normal(shape)
        direction /= np.linalg.norm(direction)
        u = rng.uniform(0.0, 0.5)
        f = built.instance.project(built.gt.factor + u * direction)
        _, grad = built.instance.loss_grad(f)
        for _ in range(directions):
            e = rng.standard_normal(shape)
            e /= np.linalg.norm(e)
            lp, _ = built.instance.loss_grad(f + h * e)
            lm, _ = built.instance.loss_grad(f - h * e)
            fd = (lp - lm) / (2.0 * h)
            an = float(np.sum(grad * e))
            rel = abs(an - fd) / max(abs(an), abs(fd), 1e-10)
            worst = max(worst, rel)
    return worst


def cmd_gradcheck(model_name, seed):
    names = list(DESK) if model_name in (None, "all") else [model_name]
    worst_overall = 0.0
    failed = False
    for name in names:
        worst = gradcheck_model(name, seed)
        tol = 1e-6 if name in ("sparse-pca", "planted") else 1e-4
        status = "ok" if worst <= tol else "FAIL"
        failed = failed or worst > tol
        print(f"gradcheck {name}: max_rel_err={_fmt(worst)} tol={_fmt(tol)} {status}")
        worst_overall = max(worst_overall, worst)
    return 1 if failed else 0


def cmd_probe(model_name, seed, out_dir, samples=200):
    """Fit the local regularity constants on a desk instance; JSON report."""
    os.makedirs(out_dir, exist_ok=True)
    built = desk_built(model_name, seed)
    if model_name == "quadratic":
        radius = 0.5 * built.gt.sigma_r
        relaxed = False
    else:
        radius = float(PROBE_RADII[model_name](built.gt))
        relaxed = model_name in RELAXED_LIPSCHITZ
    cfg = ProbeConfig(radius=radius, samples=samples, seed=child_seed(seed, 11))
    report = probe_model(built.instance, built.gt, cfg, relaxed=relaxed)
    payload = dict(report.to_dict(), model=model_name, radius=radius, seed=int(seed))
    path = os.path.join(out_dir, f"probe_{model_name}_s{seed}.json")
    write_json(path, payload)
    print(f"probe {model_name}: alpha={_fmt(report.alpha)} eps={_fmt(report.eps)} "
          f"L={_fmt(report.lipschitz)} beta={_fmt(report.beta)} "
          f"violations={report.descent_violations}")
    return path
