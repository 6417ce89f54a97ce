"""Flat experiment configuration: loading, merging, validation, hashing."""

from __future__ import annotations

import hashlib
import json
import re

import yaml

from .errors import ConfigError

MODELS = ("completion", "regression", "sparse-pca", "planted", "one-bit", "decomposition")
INITS = ("svd", "diag-threshold", "hard-threshold", "random", "perturbed")

DEFAULTS = {
    "seeds": 1,
    "master_seed": 0,
    "iters": 500,
    "record_every": 1,
    "store_factors": False,
    "timing": False,
    "metric": "dist",
}

_RULE_TOKENS = re.compile(r"^[0-9a-z_+\-*/(). ]+$")
_RULE_NAMES = {"r", "d", "p", "n", "k", "gamma"}


def eval_rule(expr, **names):
    """Evaluate a tiny arithmetic rule like ``"0.5*r/d"`` over model sizes."""
    expr = str(expr).strip()
    if not _RULE_TOKENS.match(expr):
        raise ConfigError(f"bad rule expression {expr!r}")
    scope = {k: v for k, v in names.items() if k in _RULE_NAMES and v is not None}
    try:
        return float(eval(expr, {"__builtins__": {}}, scope))  # noqa: S307 - vetted tokens
    except Exception as exc:
        raise ConfigError(f"cannot evaluate rule {expr!r}: {exc}") from exc


def load_config_file(path):
    """Read a flat key-value YAML (or JSON) experiment description."""
    with open(path, "r", encoding="utf-8") as fh:
        loaded = yaml.safe_load(fh)
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ConfigError("config file must be a flat key-value mapping")
    return loaded


def merge(preset_cfg, file_cfg=None, overrides=None):
    """Preset < config file < explicit flag overrides."""
    cfg = dict(DEFAULTS)
    for layer in (preset_cfg, file_cfg, overrides):
        if layer:
            cfg.update(layer)
    return cfg


def parse_override(text):
    """Parse one ``key=value`` CLI override with YAML value semantics."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like key=value")
    key, _, raw = text.partition("=")
    return key.strip(), yaml.safe_load(raw)


def validate(cfg):
    model = cfg.get("model")
    if model not in MODELS:
        raise ConfigError(f"model must be one of {MODELS}, got {model!r}")
    init = cfg.get("init")
    if init is not None and init not in INITS:
        raise ConfigError(f"init must be one of {INITS}, got {init!r}")
    if int(cfg.get("iters", 1)) < 1:
        raise ConfigError("iters must be >= 1")
    if int(cfg.get("seeds", 1)) < 1:
        raise ConfigError("seeds must be >= 1")
    return cfg


def config_hash(cfg, length=12):
    """Order-independent hash of a resolved configuration."""
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:length]
