"""Command-line front end.

One subcommand per experiment kind.  Each takes a key=value config file and
an output directory; ``--seed`` / ``--trials`` override the corresponding
config fields before anything runs (so the recorded config hash reflects
what actually executed).

Exit codes: 0 success, 2 configuration error, 3 kernel (numerical) error.
Kernel failures happen before any artifact is written, so a code-3 exit
leaves no partial artifacts behind.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (KINDS, ConfigError, KernelError, parse_config, run)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_KERNEL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regspectra",
        description="spectral experiments on uniform d-regular digraphs")
    sub = parser.add_subparsers(dest="kind", required=True, metavar="KIND")
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="key=value config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override master_seed")
        p.add_argument("--trials", type=int, default=None,
                       help="override trial count")
        p.add_argument("--threads", type=int, default=1,
                       help="thread pool size for independent trials")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if not cfg.kind:
        cfg.kind = args.kind
    if cfg.kind != args.kind:
        print(f"config error: config kind {cfg.kind!r} does not match "
              f"subcommand {args.kind!r}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials

    try:
        record = run(cfg, args.out, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KernelError as exc:
        print(f"kernel error: {exc}", file=sys.stderr)
        return EXIT_KERNEL

    print(f"{record.kind}: wrote {len(record.artifacts)} artifacts to "
          f"{record.out_dir} (config {record.config_hash[:12]}, "
          f"{record.wall_clock:.2f}s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
