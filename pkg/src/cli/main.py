"""
Command-line entry point.

Exit codes: 0 ok, 1 verification failure, 2 invalid arguments,
3 runtime failure.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from src.shared.config import settings
from src.shared.error_handling import ErrorLogger, ParameterError, WalkError
from src.shared.logging_config import setup_logging
from src.shared.models import COIN_LABELS
from src.cli.commands import (
    cmd_efficiency,
    cmd_percolate,
    cmd_simulate,
    cmd_spectral,
    cmd_sweep,
    cmd_verify,
)
from src.cli.specs import ExperimentSpec, SweepSpec
from src.walk.coins import EIGEN_PRESETS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INVALID_ARGUMENTS = 2
EXIT_RUNTIME_FAILURE = 3

# argparse dest -> ExperimentSpec field
SPEC_FLAGS = {
    "kind": "kind",
    "n": "half_size",
    "rho": "rho",
    "alpha": "alpha",
    "p": "p",
    "source": "source",
    "steps": "steps",
    "realizations": "realizations",
    "seed": "seed",
    "out": "output",
    "format": "format",
}


def parse_angle(text: str) -> float:
    """Float, optionally in units of pi: '0.94pi', 'pi', '1.5'."""
    value = text.strip().lower().replace("π", "pi")
    if value.endswith("pi"):
        factor = value[:-2].rstrip("*")
        try:
            return (float(factor) if factor else 1.0) * math.pi
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid angle {text!r}")
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}")


def parse_grid(text: str) -> List[float]:
    """Comma-separated grid points."""
    return [parse_angle(token) for token in text.split(",") if token.strip()]


def parse_range(text: str) -> List[float]:
    """Inclusive 'start:stop:step' grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (parse_angle(part) for part in parts)
    try:
        return SweepSpec.grid_range(start, stop, step)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_coin_state(text: str) -> Dict[str, Any]:
    """
    Preset name, or comma-separated complex amplitudes such as '0.6,0.8j'.

    Returns:
        Spec fields to set: either coin_state or amplitudes
    """
    known = set(EIGEN_PRESETS) | {label for labels in COIN_LABELS.values() for label in labels}
    if text in known:
        return {"coin_state": text, "amplitudes": None}
    try:
        values = [complex(token.replace(" ", "")) for token in text.split(",")]
    except ValueError:
        raise ParameterError(f"coin state {text!r} is neither a preset nor a complex list")
    return {"coin_state": None, "amplitudes": [(value.real, value.imag) for value in values]}


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", type=Path, help="ExperimentSpec JSON file; flags override it")
    common.add_argument("--kind", choices=["two-state", "lazy", "percolated"])
    common.add_argument("--n", type=int, help="N; the ring has 2N vertices")
    common.add_argument("--rho", type=float)
    common.add_argument("--alpha", type=parse_angle, help="phase, e.g. 0.94pi")
    common.add_argument("--p", type=float, help="edge presence probability")
    common.add_argument("--coin-state", help="sigma+, sigma1-, sigma2-, L, S, R or amplitudes")
    common.add_argument("--source", type=int, help="source vertex label")
    common.add_argument("--steps", type=int)
    common.add_argument("--realizations", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default under RINGWALK_OUTPUT_DIR)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--workers", type=int, help="parallel tasks")
    common.add_argument(
        "--log-level", type=str.upper, choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    parser = argparse.ArgumentParser(
        prog="ringwalk",
        description="Coined quantum walks on a ring with a sink",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("simulate", parents=[common], help="survival series of one experiment")
    commands.add_parser("efficiency", parents=[common], help="transport efficiency report (lazy)")
    commands.add_parser("spectral", parents=[common], help="spectrum and predicted decay rate")
    commands.add_parser("percolate", parents=[common], help="averaged percolated survival")

    sweep = commands.add_parser("sweep", parents=[common], help="derived quantity along one axis")
    sweep.add_argument("--axis", required=True, choices=["alpha", "rho", "p", "N"])
    points = sweep.add_mutually_exclusive_group(required=True)
    points.add_argument("--grid", type=parse_grid, help="comma-separated points")
    points.add_argument("--range", dest="grid", type=parse_range, help="start:stop:step, inclusive")
    sweep.add_argument(
        "--quantity", required=True, choices=["gamma_fit", "gamma_predicted", "eta", "plateau"]
    )

    verify = commands.add_parser("verify", parents=[common], help="run the invariant suite")
    verify.add_argument("--level", choices=["quick", "full"], default="quick")
    return parser


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    """
    ExperimentSpec from an optional JSON file overridden by explicit flags.

    Raises:
        ParameterError: If the spec file cannot be read
        ValidationError: If the resulting spec is invalid
    """
    data: Dict[str, Any] = {}
    if args.spec is not None:
        try:
            data = ExperimentSpec.from_json(args.spec.read_text(encoding="utf-8")).model_dump()
        except OSError as exc:
            raise ParameterError(f"cannot read spec file {args.spec}: {exc}")

    for flag, field_name in SPEC_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            data[field_name] = value
    if args.coin_state is not None:
        data.update(parse_coin_state(args.coin_state))

    return ExperimentSpec.model_validate(data)


def run(args: argparse.Namespace) -> int:
    workers = args.workers

    if args.command == "verify":
        report, path = cmd_verify(args.level, args.out, workers)
        print(path)
        return EXIT_OK if report["overall_passed"] else EXIT_VERIFICATION_FAILED

    spec = spec_from_args(args)
    if args.command == "sweep":
        sweep = SweepSpec(base=spec, axis=args.axis, grid=args.grid, quantity=args.quantity)
        path = cmd_sweep(sweep, workers)
    elif args.command == "simulate":
        path = cmd_simulate(spec, workers)
    elif args.command == "efficiency":
        path = cmd_efficiency(spec)
    elif args.command == "spectral":
        path = cmd_spectral(spec)
    else:
        path = cmd_percolate(spec, workers)

    print(path)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or settings.log_level, settings.log_file)
    error_logger = ErrorLogger(__name__)

    try:
        return run(args)
    except (ParameterError, ValidationError) as exc:
        error_logger.log_error(exc, {"command": args.command}, level=logging.WARNING)
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return EXIT_INVALID_ARGUMENTS
    except (WalkError, OSError) as exc:
        error_logger.log_error(exc, {"command": args.command})
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_FAILURE


if __name__ == "__main__":
    sys.exit(main())
