"""``fweno`` command line."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from .experiments import COMMANDS, EXIT_ERROR, ConfigError, load_config, with_overrides


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fweno", description="Run WENO experiments from a config file.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, type=Path, help="key=value experiment file")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    p.add_argument("--threads", type=int, default=None, help="worker threads for 2D line sweeps")
    p.add_argument("--instrument", action="store_true", help="report arithmetic operation totals")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # numba falls back to another threading layer on its own
    warnings.filterwarnings("ignore", message="The TBB threading layer requires")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.threads is not None:
            import numba

            if args.threads < 1:
                raise ConfigError("--threads must be at least 1")
            numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
        spec = load_config(args.config)
        if args.instrument:
            spec = with_overrides(spec, instrument=True)
        result = COMMANDS[args.command](spec, args.out)
    except (ConfigError, OSError, RuntimeError, ValueError) as e:
        print(f"fweno: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    for path in result.outputs:
        print(path)
    for msg in result.messages:
        print(f"fweno: {msg}", file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
