#!/usr/bin/env python3
"""Run every experiment config in a directory.

Batch wrapper over the same machinery as the CLI: each TOML in
--configs lands in --out/<name>/ with result.json, tables/, and
optionally plots/.  Exits nonzero if any run fails, after attempting
all of them.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from hardygeom.experiments import (
    ConfigError,
    NumericalError,
    default_plots,
    emit_plot,
    parse_config,
    run,
    write_record,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default="configs", help="directory of TOML files")
    ap.add_argument("--out", default="runs", help="output root")
    ap.add_argument("--plot", action="store_true", help="emit default plots")
    ap.add_argument("--jobs", type=int, default=None, help="worker count (0 = cores)")
    args = ap.parse_args()

    paths = sorted(Path(args.configs).glob("*.toml"))
    if not paths:
        print(f"no configs under {args.configs}", file=sys.stderr)
        return 2

    failures = 0
    for path in paths:
        name = path.stem
        overrides = {"plot": args.plot} if args.plot else {}
        if args.jobs is not None:
            overrides["jobs"] = args.jobs
        try:
            config = parse_config(path, overrides)
            record = run(config)
            out = Path(args.out) / name
            write_record(record, out)
            if config.plot:
                for spec in default_plots(config.kind):
                    emit_plot(record, spec, out)
        except (ConfigError, NumericalError, OSError) as e:
            print(f"{name}: FAILED ({e})", file=sys.stderr)
            failures += 1
            continue
        metrics = ", ".join(
            f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
            for k, v in sorted(record.metrics.items())
        )
        print(f"{name}: {metrics}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
