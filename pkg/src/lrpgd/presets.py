"""Named experiment presets and their desk-scale overlays.

Each preset stores the simulation parameters of one figure protocol verbatim
in ``base``; ``desk`` is the documented scale-down overlay applied by the
``--desk`` flag so the same protocol runs in seconds.  The scale maps are
noted per preset.
"""

from __future__ import annotations

import copy

from .errors import ConfigError

PRESETS = {
    # convergence curves, matrix completion (SVD start; init: "random" for
    # the random-start variant).  desk map: d/5, r/2, p*2, noiseless, iters*3
    "fig-mc-conv": {
        "base": {
            "model": "completion", "d": 1000, "r": 10, "p": 0.1,
            "sigma_rule": "0.01*r/d", "init": "svd", "iters": 50,
            "seeds": 1, "metric": "per_entry",
        },
        "desk": {"d": 200, "r": 5, "p": 0.2, "sigma_rule": "0", "iters": 150},
    },
    # per-entry error vs r/d.  desk map: (d, r) points /10 .. /50, iters*4
    "fig-mc-scale": {
        "base": {
            "model": "completion", "p": 0.1, "sigma": 0.001, "init": "svd",
            "sweep_d": [1000, 2000, 4000], "sweep_r": [10, 20, 40],
            "sweep_x": "r/d", "seeds": 20, "iters": 50, "metric": "per_entry",
        },
        "desk": {"sweep_d": [100, 200, 400], "sweep_r": [2, 4, 8], "iters": 200},
    },
    # sparse-PCA convergence (diagonal-threshold start; init: "perturbed"
    # for the perturbation variant).  desk map: d/10, iters*4
    "fig-spca-conv": {
        "base": {
            "model": "sparse-pca", "d": 5000, "r": 1, "k": 5, "gamma": 4.0,
            "n": 4000, "init": "diag-threshold", "iters": 50, "seeds": 1,
            "metric": "sin_sq",
        },
        "desk": {"d": 500, "iters": 200},
    },
    # estimation error vs k/n.  desk map: d/10, iters*5
    "fig-spca-scale": {
        "base": {
            "model": "sparse-pca", "d": 5000, "r": 1, "k": 5, "gamma": 4.0,
            "init": "diag-threshold", "sweep_n": [1000, 2000, 4000],
            "sweep_x": "k/n", "seeds": 20, "iters": 50, "metric": "sin_sq",
        },
        "desk": {"d": 500, "iters": 250},
    },
    # planted-subgraph convergence.  desk map: d/20, k/10, iters*4
    "fig-planted-conv": {
        "base": {
            "model": "planted", "d": 8000, "k": 2000, "p": 0.13, "q": 0.05,
            "init": "svd", "iters": 50, "seeds": 1, "metric": "dist",
        },
        "desk": {"d": 400, "k": 200, "iters": 200},
    },
    # recovery frequency vs p*d at k = d/2, q = p/4.  desk map: d/20, iters*6
    "fig-planted-phase": {
        "base": {
            "model": "planted", "k_rule": "d/2", "q_rule": "p/4", "init": "svd",
            "phase_param": "p", "phase_value_rule": "over_d",
            "phase_values": [4, 13, 22, 31, 40], "phase_sizes": [8000],
            "iters": 50, "seeds": 20, "metric": "dist",
        },
        "desk": {"phase_sizes": [400], "iters": 300},
    },
    # one-bit convergence from a random start.  desk map: d/5, logistic
    # link for the desk acceptance, iters*6
    "fig-ob-conv": {
        "base": {
            "model": "one-bit", "d": 1000, "r": 3, "p": 0.5, "link": "probit",
            "sigma_rule": "0.5*r/d", "init": "random", "iters": 50, "seeds": 1,
            "metric": "per_entry",
        },
        "desk": {"d": 200, "link": "logistic", "iters": 300},
    },
    # per-entry error vs (r/d)^3.  desk map: (d, r) points /10, logistic
    # link, text-convention noise sigma = 2r/d, iters*6
    "fig-ob-scale": {
        "base": {
            "model": "one-bit", "p": 0.5, "link": "probit",
            "sigma_rule": "0.5*r/d", "init": "random",
            "sweep_d": [1000, 2000], "sweep_r": [3, 5],
            "sweep_x": "r**3/d**3", "seeds": 20, "iters": 50,
            "metric": "per_entry",
        },
        "desk": {
            "sweep_d": [100, 200], "sweep_r": [2, 3], "link": "logistic",
            "sigma_rule": "2*r/d", "iters": 300,
        },
    },
    # decomposition convergence (hard-threshold start; init: "random" for
    # the random-start variant).  desk map: already desk-sized, iters*2
    "fig-ls-conv": {
        "base": {
            "model": "decomposition", "d": 600, "r": 5, "k": 100,
            "spike_scale": 10.0, "sigma_rule": "0.1*r/d",
            "init": "hard-threshold", "iters": 50, "seeds": 1, "metric": "dist",
        },
        "desk": {"iters": 100},
    },
    # recovery frequency vs k/d at sigma = 0.  desk map: d -> 200, iters*5
    "fig-ls-phase": {
        "base": {
            "model": "decomposition", "r": 6, "spike_scale": 10.0,
            "sigma_rule": "0", "init": "hard-threshold",
            "phase_param": "k", "phase_value_rule": "times_d",
            "phase_values": [0.02, 0.1, 0.25, 0.5], "phase_sizes": [600],
            "iters": 50, "seeds": 20, "metric": "dist",
        },
        "desk": {"phase_sizes": [200], "iters": 250},
    },
}


def preset_config(name, desk=False):
    """Resolve a preset into a flat config dict (a fresh copy)."""
    try:
        entry = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    cfg = copy.deepcopy(entry["base"])
    if desk:
        cfg.update(copy.deepcopy(entry.get("desk", {})))
    cfg["preset"] = name
    cfg["desk"] = bool(desk)
    return cfg
