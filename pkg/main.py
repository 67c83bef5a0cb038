"""
Main entry point for the cognitive radio spectrum sensing toolkit.
This file dispatches the subcommands and maps failures to exit codes.
"""

import argparse
import json
import logging
import os
import time
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from pipeline.models.models import (
    ConnectivityRequest,
    ConvertPmfRequest,
    ExperimentConfig,
    NeighborhoodRequest,
    RiskCurveRequest,
    RobustRequest,
)
from pipeline.orchestrator import ExperimentOrchestrator, load_config, resolve_seed
from pipeline.selftest import run_selftest
from pipeline.utils.helpers import to_jsonable, write_report
from sensing.errors import DegenerateStats, Infeasible, InvalidPmf, NumericFailure, SizeLimit, Unbounded
from services.sensing_service import SensingService

# Load environment variables
load_dotenv()

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4

FIGURES = ("fig3", "fig4", "fig5", "fig6", "fig7")

# Subcommand name -> (request model, service method name)
SUBCOMMANDS = {
    "risk-curve": (RiskCurveRequest, "risk_curve"),
    "robust": (RobustRequest, "robust"),
    "neighborhood": (NeighborhoodRequest, "neighborhood"),
    "connectivity": (ConnectivityRequest, "connectivity"),
    "convert-pmf": (ConvertPmfRequest, "convert_pmf"),
}


def setup_logging(debug_level):
    """Configure logging from the --debug count, else CRN_SENSE_LOG."""
    log_level = getattr(logging, os.getenv("CRN_SENSE_LOG", "INFO").upper(), logging.INFO)
    if debug_level >= 1:
        log_level = logging.DEBUG

    # Configure root logger
    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler()],
        force=True,
    )

    if debug_level >= 2:
        logging.getLogger('pipeline').setLevel(logging.DEBUG)
        logging.getLogger('experiment').setLevel(logging.DEBUG)

    return logging.getLogger('main')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Cognitive radio spectrum sensing toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Path to a JSON configuration")
    common.add_argument("--seed", type=int, help="Root seed (default: CRN_SENSE_SEED, then config, then 0)")
    common.add_argument("--out", type=str, default=None, help="Output directory (default: output)")
    common.add_argument("--threads", type=int, default=None, help="Worker threads (default: CRN_SENSE_THREADS)")
    common.add_argument("--gnuplot", action="store_true", help="Also write a gnuplot script per CSV")
    common.add_argument(
        "--debug",
        action="count",
        default=0,
        help="Enable debug mode (use multiple times for more verbosity)",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        subparsers.add_parser(name, parents=[common], help=f"Run {name} from a JSON request")
    reproduce = subparsers.add_parser("reproduce", parents=[common], help="Reproduce one figure")
    reproduce.add_argument("figure", choices=FIGURES)
    subparsers.add_parser("selftest", parents=[common], help="Check analytic anchors")
    return parser


def _read_json(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def run_command(args: argparse.Namespace, logger: logging.Logger) -> int:
    if args.command == "selftest":
        results = run_selftest()
        return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NUMERIC

    if args.command == "reproduce":
        if args.config:
            config = load_config(args.config, experiment=args.figure)
        else:
            config = ExperimentConfig(experiment=args.figure)
        orchestrator = ExperimentOrchestrator(threads=args.threads)
        written = orchestrator.run_and_write(config, args.seed, args.out, args.gnuplot)
        logger.info(f"{args.figure} written: {', '.join(written)}")
        return EXIT_OK

    model, method = SUBCOMMANDS[args.command]
    request = model.model_validate(_read_json(args.config))
    seed = resolve_seed(args.seed)
    service = SensingService(threads=args.threads)
    start = time.perf_counter()
    report = getattr(service, method)(request, seed=seed)
    report = report.model_copy(update={"wall_time": time.perf_counter() - start})
    write_report(report, args.out or "output", args.gnuplot)
    print(json.dumps(to_jsonable(report.summary), sort_keys=True))
    return EXIT_OK


def main(argv=None):
    """Main entry point for the application."""
    args = build_parser().parse_args(argv)
    logger = setup_logging(args.debug)

    try:
        return run_command(args, logger)
    except (ValidationError, json.JSONDecodeError, FileNotFoundError, SizeLimit, ValueError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (DegenerateStats, InvalidPmf, Infeasible) as e:
        logger.error(f"Infeasible statistics: {e}")
        return EXIT_INFEASIBLE
    except (Unbounded, NumericFailure) as e:
        logger.error(f"Numeric failure: {e}")
        return EXIT_NUMERIC
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}", exc_info=args.debug > 0)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    exit(main())
