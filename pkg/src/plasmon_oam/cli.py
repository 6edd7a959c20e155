"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 domain error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, DomainError
from .pipeline import dumps_json, reproduce_paper, run_design_filter, run_mode_matrix, run_scan

log = logging.getLogger("plasmon_oam")

EXIT_CONFIG = 2
EXIT_DOMAIN = 3


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, default=None, help="JSON config file (defaults: measured values)")
    p.add_argument("--seed", type=int, default=None, help="override run.rng_seed")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. scan.n_points=51 (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="plasmon-oam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("reproduce-paper", parents=[common], help="full pipeline; writes CSVs and bundle.json")

    p = sub.add_parser("scan", parents=[common], help="idler hologram scan as CSV")
    p.add_argument("--state", choices=["before", "after"], default="before")

    p = sub.add_parser("mode-matrix", parents=[common], help="pure-mode coincidence matrix as CSV")
    p.add_argument("--state", choices=["before", "after"], default="before")

    p = sub.add_parser("design-filter", parents=[common], help="concentration filter as JSON")
    p.add_argument("--cap", type=float, default=None, help="largest allowed transmission (default: max eta)")
    p.add_argument("--state", choices=["before", "after"], default="before")
    return parser


def _emit(text: str, out: Path | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, newline="")
    log.info("wrote %s", out / name)


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = load_config(args.config, args.overrides, args.seed)
        if args.command == "reproduce-paper":
            bundle = reproduce_paper(config)
            for path in bundle.write(args.out or Path("results")):
                log.info("wrote %s", path)
            data = bundle.data
            print(f"after-plate pair amplitudes: {data['states']['after']['pair_amplitudes']}")
            for side in ("before", "after"):
                s = data["scans"][side]
                print(f"{side}: epsilon={s['epsilon']:.6f} visibility={s['visibility_expected']:.4f} "
                      f"dip={s['dip_position']:.4f}w")
            print(f"dip shift: {data['dip_shift']:.4f}w")
        elif args.command == "scan":
            _emit(run_scan(config, args.state).to_csv(), args.out, "scan.csv")
        elif args.command == "mode-matrix":
            _emit(run_mode_matrix(config, args.state).to_csv(), args.out, "mode_matrix.csv")
        elif args.command == "design-filter":
            cap = max(config.eta.values()) if args.cap is None else args.cap
            if not 0.0 < cap <= 1.0:
                raise ConfigError(f"--cap must lie in (0, 1], got {cap}")
            _emit(dumps_json(run_design_filter(config, cap, args.state)), args.out, "filter.json")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
