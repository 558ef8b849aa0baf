"""Command-line front end.

    norm-sim run --config exp.toml [--trace trace.csv] [--seed N] [--out run.csv]
    norm-sim sweep --policy dbp|cbp|tbp --config exp.toml --out sweep.csv [--jobs N]
    norm-sim catalog --format csv

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import ConfigError, load_config
from .harness import emit_csv, run_csv, run_experiment, sweep, sweep_csv
from .nvmem import catalog_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="norm-sim",
        description="Cycle-accurate intermittent-computing emulation runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="single simulation run")
    run_p.add_argument("--config", required=True, help="experiment TOML file")
    run_p.add_argument("--trace", help="voltage trace CSV (overrides the config)")
    run_p.add_argument("--seed", type=int, help="override the experiment seed")
    run_p.add_argument("--prescale", type=int, help="override the trace prescaler")
    run_p.add_argument("--out", help="write the report CSV here (default stdout)")

    sweep_p = sub.add_parser("sweep", help="parameter sweep over the standard range")
    sweep_p.add_argument("--policy", required=True, choices=("dbp", "cbp", "tbp"))
    sweep_p.add_argument("--config", required=True, help="experiment TOML file")
    sweep_p.add_argument("--out", help="write the sweep CSV here (default stdout)")
    sweep_p.add_argument("--seed", type=int, help="override the experiment seed")
    sweep_p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    cat_p = sub.add_parser("catalog", help="export the memory technology catalog")
    cat_p.add_argument("--format", choices=("csv",), default="csv")
    cat_p.add_argument("--out", help="write here instead of stdout")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        emit_csv(text, out)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
            if args.seed is not None:
                config = dataclasses.replace(config, seed=args.seed)
            if args.trace is not None:
                config = dataclasses.replace(config, trace_file=args.trace, synth=None)
            if args.prescale is not None:
                config = dataclasses.replace(config, prescale=args.prescale)
                config.validate()
            _emit(run_csv(run_experiment(config)), args.out)
        elif args.command == "sweep":
            config = load_config(args.config)
            if args.seed is not None:
                config = dataclasses.replace(config, seed=args.seed)
            report = sweep(config, policy=args.policy, jobs=args.jobs)
            _emit(sweep_csv(report), args.out)
        else:
            _emit(catalog_csv(), args.out)
    except ConfigError as exc:
        print(f"norm-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"norm-sim: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # SimulationFault and invariant violations -> 4
        print(f"norm-sim: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
