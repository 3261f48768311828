"""Command line entry point.

    nonlocal-transport run <config> [--set section.key=value ...]
    nonlocal-transport sweep <config> [--workers N]
    nonlocal-transport verify-lemma <config>
    nonlocal-transport plot <run-dir>

Relative output directories are resolved against ``$NLT_OUTPUT_ROOT``
(default: the working directory).  Exit codes: 0 pass, 1 monitor
violation, 2 numerical abort, 3 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, LemmaSpec, OUTPUT_ROOT_ENV, load_config
from .experiment import (
    EXIT_ABORT,
    EXIT_CONFIG,
    EXIT_OK,
    plot_run,
    run_lemma_verify,
    run_scenario,
    run_sweep,
)

log = logging.getLogger("nonlocal_transport")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nonlocal-transport",
        description="Simulate theta_t - (H theta) theta_x = -nu Lambda^alpha theta and check "
                    "the associated estimates.",
        epilog=f"Relative output directories are placed under ${OUTPUT_ROOT_ENV} if set.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", type=Path, help="scenario file")
        sp.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="override a config value")
        sp.add_argument("--output-dir", type=Path, default=None,
                        help="write artifacts here instead of the configured directory")

    common(sub.add_parser("run", help="run the scenario named in the config"))
    sp = sub.add_parser("sweep", help="run the (nu, alpha) grid of the [sweep] section")
    common(sp)
    sp.add_argument("--workers", type=int, default=None, help="parallel processes")
    common(sub.add_parser("verify-lemma", help="check the weighted inequality on a corpus"))
    pp = sub.add_parser("plot", help="re-render plots of a finished run")
    pp.add_argument("run_dir", type=Path)
    return p


def _load(args):
    spec = load_config(args.config, args.overrides)
    if args.output_dir is not None:
        spec = replace(spec, output_dir=args.output_dir)
    return spec


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "plot":
            for path in plot_run(args.run_dir):
                print(path)
            return EXIT_OK
        spec = _load(args)
        if args.command == "run":
            res = run_scenario(spec)
        elif args.command == "sweep":
            if spec.sweep is None:
                raise ConfigError("config has no [sweep] section", source=str(args.config))
            res = run_sweep(spec, workers=args.workers)
        else:
            if spec.lemma is None:
                spec = replace(spec, lemma=LemmaSpec())
            res = run_lemma_verify(spec)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT

    outcome = res.summary.get("outcome", {})
    status = outcome.get("status")
    if status is None and "points" in res.summary:
        failed = sum(p["exit_code"] != EXIT_OK for p in res.summary["points"])
        status = f"{len(res.summary['points'])} points, {failed} with nonzero exit"
    elif status is None:
        status = "all pass" if res.summary.get("all_pass") else "failures"
    print(f"{spec.name}: {status} -> {res.run_dir} (exit {res.exit_code})")
    for name, m in res.summary.get("monitors", {}).items():
        if m["status"] == "fail":
            print(f"  monitor {name} failed: value {m['value']} limit {m['limit']}")
    return res.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
