"""Command-line front end.

One subcommand per experiment kind; flags override config-file fields.
Results land under --out (or the config's `out`, or $HARDYGEOM_OUT/<kind>,
or ./runs/<kind>): result.json, tables/*.csv, and with --plot also
plots/*.svg.  Diagnostics go to stderr; files are the only result channel.

Exit codes: 0 ok, 2 invalid config, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .experiments import (
    ENV_OUT,
    ConfigError,
    NumericalError,
    config_from_mapping,
    default_plots,
    emit_plot,
    parse_config,
    run,
    write_record,
)

_SUBCOMMANDS = {
    "delta": "delta",
    "bessel": "bessel",
    "riesz": "riesz",
    "interp": "interp",
    "dyadic": "dyadic",
    "counterexample": "counterexample",
    "selftest": "kernel-selftest",
}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardygeom",
        description="model-space geometry experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {kind} experiment")
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="random seed (u64)")
        p.add_argument("--grid-k", type=int, dest="grid_k",
                       help="dyadic grid depth")
        p.add_argument("--jobs", type=int, help="worker count (0 = cores)")
        p.add_argument("--plot", action="store_true", default=None,
                       help="emit default SVG plots")
        p.set_defaults(kind=kind)
    return parser


def _resolve_out(args_out, config_out, kind: str) -> str:
    if args_out:
        return args_out
    if config_out:
        return config_out
    env = os.environ.get(ENV_OUT)
    if env:
        return os.path.join(env, kind)
    return os.path.join("runs", kind)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {"kind": args.kind}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.grid_k is not None:
        overrides["grid_k"] = args.grid_k
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.plot is not None:
        overrides["plot"] = args.plot

    try:
        if args.config:
            config = parse_config(args.config, overrides)
        else:
            config = config_from_mapping({}, overrides)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        record = run(config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    out = _resolve_out(args.out, config.out_dir, config.kind)
    try:
        write_record(record, out)
        if config.plot:
            for spec in default_plots(config.kind):
                emit_plot(record, spec, out)
    except OSError as e:
        print(f"i/o failure: {e}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
