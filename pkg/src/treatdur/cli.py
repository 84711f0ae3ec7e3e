"""Command line entry point: ``treatdur run`` and ``treatdur closed-form``."""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

from treatdur import __version__
from treatdur.config import ConfigError, load_config, parse_config
from treatdur.experiments import closed_form_table, format_table, run
from treatdur.hazards import DomainError


def _bundled(name: str) -> str | None:
    ref = resources.files("treatdur") / "configs" / name
    return ref.read_text() if ref.is_file() else None


def _load(path: str):
    p = Path(path)
    if p.exists():
        return load_config(p)
    text = _bundled(p.name)
    if text is None:
        raise ConfigError(f"{path}: no such file")
    logging.getLogger(__name__).info("using bundled config %s", p.name)
    return parse_config(text, source=f"<bundled>/{p.name}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treatdur",
        description="Simulate treatment-timing duration models and check their identified-minimum distribution.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the experiments listed in a config file")
    r.add_argument("config", help="config path; a bare bundled name such as rebuttal.cfg also works")
    r.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
    r.add_argument("--seed", type=int, help="override [run] seed")
    r.add_argument("--n", type=int, help="override [run] n")
    r.add_argument("--workers", type=int, help="override [run] workers")

    c = sub.add_parser("closed-form", help="constant-hazard reference table with Monte Carlo counterparts")
    c.add_argument("--lw", type=float, required=True, help="treatment hazard")
    c.add_argument("--l0", type=float, required=True, help="pre-treatment outcome hazard")
    c.add_argument("--l1", type=float, required=True, help="post-treatment outcome hazard")
    c.add_argument("--n", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "closed-form":
            sys.stdout.write(format_table(closed_form_table(args.lw, args.l0, args.l1, args.n, args.seed)))
            return 0
        cfg = _load(args.config).override(out_dir=args.out, seed=args.seed, n=args.n, workers=args.workers)
        status = run(cfg)
        sys.stdout.write((cfg.out_dir / "summary.txt").read_text())
        return status
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
