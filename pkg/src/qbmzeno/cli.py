"""Command-line entry point: ``qbmzeno {surface,variance,correlators}``.

Exit codes: 0 success, 2 invalid configuration, 3 unsupported regime or
observable, 4 numerical-consistency failure.
"""
from __future__ import annotations

import argparse
import sys

from .config import FORMATS, load_config
from .errors import ConfigError, NumericalConsistencyError, UnsupportedRegimeError
from .runner import dump_correlators, run_density_surface, run_variance_curve, write_table

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSUPPORTED = 3
EXIT_NUMERICAL = 4

COMMANDS = {
    "surface": (run_density_surface, "conditional density over (t_bar, x_F)"),
    "variance": (run_variance_curve, "conditional variance versus elapsed time"),
    "correlators": (dump_correlators, "S, A (and S_pp, A_pp for Drude) versus time"),
}


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbmzeno",
        description="Damped quantum oscillator under repeated Gaussian measurements.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", default=None,
                       help="output file (default: output.path from the config, else stdout)")
        p.add_argument("--format", choices=FORMATS, default=None,
                       help="output format (default: output.format from the config)")
        p.add_argument("--threads", type=_positive_int, default=1,
                       help="worker threads over sweep cells (output order is unaffected)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    driver = COMMANDS[args.command][0]
    try:
        cfg = load_config(args.config)
        table = driver(cfg, threads=args.threads)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedRegimeError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except NumericalConsistencyError as exc:
        print(f"numerical consistency failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    fmt = args.format or cfg.output_format
    path = args.out or cfg.output_path
    text = write_table(table, path, fmt)
    if path is None:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
