"""Command line entry point: ``semirec analyze|validate|plot``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, load, validate
from .report import emit_plot_data, run
from .verdict import BudgetExceeded

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3

log = logging.getLogger("semirec")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semirec", description="Recurrence analysis for semigroups of self-maps.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the analyses of a config and write a JSON report")
    a.add_argument("config")
    a.add_argument("--out", help="report path (default: config output.report, else stdout)")
    a.add_argument("--seed", type=int, help="override the sampling seed")
    a.add_argument("--max-cells", type=int, help="safety cap on grid sizes")

    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")

    pl = sub.add_parser("plot", help="CSV plot data for one analysis of a report")
    pl.add_argument("report")
    pl.add_argument("analysis", help="analysis id; append '/chains' for chain witness steps")
    pl.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "plot":
            report = json.loads(Path(args.report).read_text())
            aid, _, part = args.analysis.partition("/")
            _write(emit_plot_data(report, aid, part or None), args.out)
            return EXIT_OK
        cfg = load(args.config)
        if args.command == "validate":
            validate(cfg)
            print(f"ok: {len(cfg.analyses)} analyses")
            return EXIT_OK
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must fit in an unsigned 64-bit integer")
            cfg.seed = args.seed
        if args.max_cells is not None:
            cfg.max_cells = args.max_cells
        report = run(cfg)
        out = args.out or cfg.output.get("report")
        _write(json.dumps(report, indent=2, ensure_ascii=False) + "\n", out)
        if out:
            log.info("report written to %s", out)
        return EXIT_OK
    except (ConfigError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"budget cap: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
