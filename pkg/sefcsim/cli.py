"""Command-line entry point: ``sefcsim run|sweep|compare|config``.

Exit codes: 0 success, 3 file not found, 4 parse error, 5 validation error,
6 simulation or sweep failure, 7 comparison error.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger

from sefcsim import __version__
from sefcsim.core.config import SimConfig, default_config, dump_config_yaml
from sefcsim.core.exceptions import (
    ComparisonError,
    ConfigParseError,
    ConfigValidationError,
    SimulationError,
    SweepError,
)
from sefcsim.experiments.compare import compare_metrics, load_metrics, render_comparison
from sefcsim.experiments.presets import load_sweep
from sefcsim.experiments.sweep import metrics_frame, metrics_row, run_sweep, write_sweep
from sefcsim.simulation.engine import run_simulation

EXIT_OK = 0
EXIT_NOT_FOUND = 3
EXIT_PARSE = 4
EXIT_VALIDATION = 5
EXIT_RUN = 6
EXIT_COMPARE = 7


def cmd_run(config_path: str, trace: Optional[str] = None, header: bool = False) -> int:
    """Run one simulation and print its metrics row as CSV."""
    config = SimConfig.from_yaml(config_path)
    artifacts = run_simulation(config, trace_path=trace)
    frame = metrics_frame([metrics_row(config, artifacts.summary)])
    sys.stdout.write(frame.to_csv(index=False, header=header, lineterminator="\n"))
    return EXIT_OK


def cmd_sweep(target: str, out_dir: str, workers: int = 1) -> int:
    """Run a sweep file or preset and write its CSV files to ``out_dir``."""
    spec = load_sweep(target)
    frame = run_sweep(spec, workers=workers)
    paths = write_sweep(frame, spec, out_dir)
    sys.stdout.write(f"{paths['metrics']}\n{paths['aggregate']}\n")
    return EXIT_OK


def cmd_compare(metrics_csv: str) -> int:
    """Print SEFC's percent differences against each baseline."""
    table = compare_metrics(load_metrics(metrics_csv))
    sys.stdout.write(render_comparison(table) + "\n")
    return EXIT_OK


def cmd_config(out: Optional[str] = None) -> int:
    """Emit the documented default configuration as YAML."""
    text = dump_config_yaml(default_config())
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sefcsim", description="Seeded FANET clustering simulator"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"],
        help="stderr log level (default: WARNING)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one simulation")
    run.add_argument("config", help="YAML config file")
    run.add_argument("--trace", help="write the event trace (JSON lines) here")
    run.add_argument("--header", action="store_true", help="print the CSV header")

    sweep = commands.add_parser("sweep", help="run a parameter sweep")
    sweep.add_argument("sweep", help="sweep YAML file or preset name (fig2..fig5)")
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    compare = commands.add_parser("compare", help="compare SEFC against the baselines")
    compare.add_argument("csv", help="metrics.csv written by sweep")

    config = commands.add_parser("config", help="print the default config")
    config.add_argument("--out", help="write to this file instead of stdout")
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "run":
        return cmd_run(args.config, trace=args.trace, header=args.header)
    if args.command == "sweep":
        return cmd_sweep(args.sweep, args.out, workers=args.workers)
    if args.command == "compare":
        return cmd_compare(args.csv)
    return cmd_config(args.out)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger.remove()
    logger.add(sys.stderr, level=args.log_level)
    try:
        return _dispatch(args)
    except FileNotFoundError as error:
        logger.error(str(error))
        return EXIT_NOT_FOUND
    except ConfigParseError as error:
        logger.error(str(error))
        return EXIT_PARSE
    except ConfigValidationError as error:
        for violation in error.violations:
            logger.error("{}", violation)
        return EXIT_VALIDATION
    except (SimulationError, SweepError) as error:
        logger.error(str(error))
        return EXIT_RUN
    except ComparisonError as error:
        logger.error(str(error))
        return EXIT_COMPARE


if __name__ == "__main__":
    sys.exit(main())
