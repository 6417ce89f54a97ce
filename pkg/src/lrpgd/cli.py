"""Command-line harness: run, sweep, phase, gradcheck, probe.

    lrpgd run       --preset fig-mc-conv --desk --seed 7 --out out/
    lrpgd sweep     --preset fig-mc-scale --desk --out out/
    lrpgd phase     --preset fig-planted-phase --desk --out out/
    lrpgd gradcheck --model completion --seed 3
    lrpgd probe     --model sparse-pca --seed 3 --out out/

Configuration resolves as preset < --config FILE < --set key=value < flags.
Exit codes: 0 success, 2 invalid configuration, 3 solver divergence.
"""

from __future__ import annotations

import argparse
import sys
import time

from .config import load_config_file, merge, parse_override, validate
from .errors import ConfigError, DivergenceError, LrpgdError
from .presets import PRESETS, preset_config
from .runner import cmd_gradcheck, cmd_phase, cmd_probe, cmd_run, cmd_sweep


def _common(parser, with_model=False):
    parser.add_argument("--preset", choices=sorted(PRESETS), help="named experiment preset")
    parser.add_argument("--config", help="flat key-value YAML/JSON config file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config key")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--desk", action="store_true", help="apply the preset's desk-scale overlay")
    parser.add_argument("--store-factors", action="store_true",
                        help="store iterate factors (enables the opt_err trace column)")
    parser.add_argument("--timing", action="store_true",
                        help="write real wall-clock columns (breaks byte reproducibility)")
    if with_model:
        parser.add_argument("--model", help="model name (or 'all')")


def _resolve(args):
    base = preset_config(args.preset, desk=args.desk) if args.preset else {}
    file_cfg = load_config_file(args.config) if args.config else None
    overrides = {}
    for item in args.overrides:
        key, value = parse_override(item)
        overrides[key] = value
    cfg = merge(base, file_cfg, overrides)
    if args.seed is not None:
        cfg["master_seed"] = int(args.seed)
    if args.store_factors:
        cfg["store_factors"] = True
    if args.timing:
        cfg["timing"] = True
    return validate(cfg)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="lrpgd", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep", "phase"):
        _common(sub.add_parser(name))
    grad = sub.add_parser("gradcheck")
    grad.add_argument("--model", default="all")
    grad.add_argument("--seed", type=int, default=0)
    probe = sub.add_parser("probe")
    probe.add_argument("--model", required=True)
    probe.add_argument("--seed", type=int, default=0)
    probe.add_argument("--out", default="out")
    probe.add_argument("--samples", type=int, default=200)
    args = parser.parse_args(argv)

    t0 = time.perf_counter()
    try:
        if args.command == "run":
            cmd_run(_resolve(args), args.out)
        elif args.command == "sweep":
            cmd_sweep(_resolve(args), args.out)
        elif args.command == "phase":
            cmd_phase(_resolve(args), args.out)
        elif args.command == "gradcheck":
            return cmd_gradcheck(args.model, args.seed)
        elif args.command == "probe":
            cmd_probe(args.model, args.seed, args.out, samples=args.samples)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"solver diverged at iteration {exc.iteration}: {exc}", file=sys.stderr)
        return 3
    except LrpgdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        print(f"elapsed {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
