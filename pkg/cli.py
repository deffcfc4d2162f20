"""
Lorenz Attractors - Command line entry point

Path: /cli.py
Purpose: Subcommands for validating a map, iterating orbits, locating periodic orbits, return maps,
         renormalization towers, rotation numbers, attractor classification and parameter sweeps.
         Reports are written as sorted, indented JSON; sweeps as CSV. Exit codes: 0 success,
         1 invalid input, 2 internal invariant violation.
"""

import sys
import json
import time
import logging
import argparse
from typing import Any, Callable, Dict, List, Optional

from colorama import Fore, Style, init as colorama_init

from lorenz_config import DEFAULT_MAX_PERIOD, DEFAULT_SEED, run_defaults
from lorenz_errors import InvariantViolation, LorenzError
from lorenz_map import Interval, Side, SignedPoint, StandardLorenzMap, validate
from map_spec_manager import MapSpecManager
from orbits import iterate, periodic_orbits
from return_maps import first_return, is_nice, periodic_gap_interval
from renormalization import build_tower
from cherry import as_gap_map, core_decomposition, rigid_rotation, rotation_number
from classifier import ClassifierParams, classify
from sweep import run_sweep, write_csv

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INVARIANT = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _status(color: str, label: str, message: str) -> None:
    print(f"{color}{label}{Style.RESET_ALL} {message}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lorenz", description="Analyses of contracting Lorenz maps")
    common = _Parser(add_help=False)
    common.add_argument("--map", help="Map as inline JSON, a JSON file path or a named instance (F, C, P, T)")
    common.add_argument("--out", help="Output path (default: standard output)")
    common.add_argument("--seed", type=int, default=None, help=f"Default: {DEFAULT_SEED}")
    common.add_argument("--max-period", type=int, default=None, help=f"Default: {DEFAULT_MAX_PERIOD}")
    common.add_argument("--horizon", type=int, default=None)
    common.add_argument("--grid", type=int, default=None)
    common.add_argument("--depth", type=int, default=3)
    common.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--timings", action="store_true", help="Record wall times in the execution summary")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common], help="Check map parameters")
    orbit = sub.add_parser("orbit", parents=[common], help="Forward orbit of a point")
    orbit.add_argument("--x", type=float, required=True)
    orbit.add_argument("--side", default="L", help="Side used at the critical point (L or R)")
    orbit.add_argument("--steps", type=int, default=1000)
    orbit.add_argument("--rows", action="store_true", help="Write whitespace-separated rows instead of JSON")
    sub.add_parser("periodic", parents=[common], help="Periodic orbits up to --max-period")
    ret = sub.add_parser("return-map", parents=[common], help="First return map to a nice interval")
    ret.add_argument("--interval", help="lo,hi (default: periodic gap interval around c)")
    sub.add_parser("renorm", parents=[common], help="Renormalization tower up to --depth")
    rot = sub.add_parser("rotation", parents=[common], help="Rotation number of the core gap map")
    rot.add_argument("--rho", type=float, help="Use the rigid rotation by rho instead of --map")
    sub.add_parser("classify", parents=[common], help="Attractor classification")
    sweep = sub.add_parser("sweep", parents=[common], help="Classify a parameter grid")
    sweep.add_argument("--spec", required=True, help="Sweep specification (inline JSON or path)")
    sweep.add_argument("--workers", type=int, default=None)
    sweep.add_argument("--no-progress", action="store_true")
    return parser


def _write(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _dump(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _load_map(args) -> StandardLorenzMap:
    if not args.map:
        raise UsageError("--map is required")
    manager = MapSpecManager()
    lorenz = manager.load_map(args.map)
    if lorenz is None:
        raise _SpecRejected(manager.get_diagnostic_info())
    return lorenz


class _SpecRejected(Exception):
    def __init__(self, diagnostics: Dict[str, Any]):
        super().__init__(diagnostics["message"])
        self.diagnostics = diagnostics


def _parse_interval(text: str) -> Interval:
    try:
        lo, hi = (float(v) for v in text.split(","))
        return Interval(lo, hi)
    except ValueError as exc:
        raise UsageError(f"--interval must be lo,hi with lo < hi: {exc}")


def cmd_validate(args) -> Dict[str, Any]:
    if not args.map:
        raise UsageError("--map is required")
    manager = MapSpecManager()
    lorenz = manager.load_map(args.map)
    if lorenz is None:
        diagnostics = manager.get_diagnostic_info()
        if diagnostics["status"] != "invalid_parameters":
            raise _SpecRejected(diagnostics)
        data = manager.read_source(args.map) if args.map.strip().startswith("{") else {}
        report = validate(data or {})
        return {"valid": False, "validation": report.to_dict(), "diagnostics": diagnostics, "_exit": EXIT_INVALID}
    return {"valid": True, "validation": validate(lorenz).to_dict(), "map": lorenz.to_dict()}


def cmd_orbit(args) -> Dict[str, Any]:
    lorenz = _load_map(args)
    try:
        side = Side.parse(args.side)
        orbit = iterate(lorenz, SignedPoint(args.x, side), args.steps)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.rows:
        return {"_text": "\n".join(orbit.to_rows()) + "\n"}
    return {"map": lorenz.to_dict(), "orbit": orbit.to_dict()}


def cmd_periodic(args) -> Dict[str, Any]:
    lorenz = _load_map(args)
    orbits = periodic_orbits(lorenz, args.max_period)
    attractors = sum(1 for o in orbits if o.is_attractor)
    return {"map": lorenz.to_dict(), "max_period": args.max_period, "attractor_count": attractors,
            "orbits": [o.to_dict() for o in orbits]}


def cmd_return_map(args) -> Dict[str, Any]:
    lorenz = _load_map(args)
    J = _parse_interval(args.interval) if args.interval else periodic_gap_interval(lorenz, args.max_period)
    horizon = args.horizon or 10_000
    nice = is_nice(lorenz, J, horizon)
    decomp = first_return(lorenz, J, horizon, nice=nice)
    return {"map": lorenz.to_dict(), "interval": [J.lo, J.hi], "nice": nice.to_dict(),
            "decomposition": decomp.to_dict()}


def cmd_renorm(args) -> Dict[str, Any]:
    lorenz = _load_map(args)
    kwargs = {"seed": args.seed}
    if args.horizon:
        kwargs["horizon"] = args.horizon
    if args.grid:
        kwargs["grid"] = args.grid
    tower = build_tower(lorenz, args.depth, args.max_period, **kwargs)
    return {"map": lorenz.to_dict(), "tower": tower.to_dict()}


def cmd_rotation(args) -> Dict[str, Any]:
    n = args.horizon or 1_000_000
    if args.rho is not None:
        try:
            decomp = rigid_rotation(args.rho)
        except ValueError as exc:
            raise UsageError(str(exc))
        g = as_gap_map(decomp)
        source = {"rho": args.rho}
    else:
        lorenz = _load_map(args)
        g = as_gap_map(core_decomposition(lorenz), lorenz.tol.eps_value, lorenz.tol.eps_point)
        source = {"map": lorenz.to_dict()}
    estimate = rotation_number(g, n)
    return {**source, "gap_map": g.to_dict(), "rotation": estimate.to_dict()}


def _classifier_params(args) -> ClassifierParams:
    values = {"max_period": args.max_period, "max_depth": args.depth, "seed": args.seed}
    if args.horizon:
        values["horizon"] = args.horizon
    if args.grid:
        values["grid"] = args.grid
    return ClassifierParams(**values)


def cmd_classify(args) -> Dict[str, Any]:
    lorenz = _load_map(args)
    report = classify(lorenz, _classifier_params(args))
    return {"map": lorenz.to_dict(), "report": report.to_dict(), "summary": report.summary_row()}


def _fill_defaults(args) -> None:
    """Record which analysis flags were given, then apply the run defaults"""
    args.explicit = sorted(key for key in ("seed", "max_period", "horizon", "grid")
                           if getattr(args, key) is not None)
    if args.seed is None:
        args.seed = DEFAULT_SEED
    if args.max_period is None:
        args.max_period = DEFAULT_MAX_PERIOD


def cmd_sweep(args) -> Dict[str, Any]:
    manager = MapSpecManager()
    spec = manager.load_sweep(args.spec)
    if spec is None:
        raise _SpecRejected(manager.get_diagnostic_info())
    # flags given on the command line override the specification
    if "seed" in args.explicit:
        spec.seed = args.seed
    for key in ("max_period", "horizon", "grid"):
        if key in args.explicit:
            spec.classifier[key] = getattr(args, key)
    result = run_sweep(spec, args.workers, progress=not args.no_progress)
    out = args.out or spec.out
    if out:
        with open(out, "w", newline="") as f:
            write_csv(result["rows"], f)
    else:
        write_csv(result["rows"], sys.stdout)
    logger.info(f"Sweep summary: {result['execution_summary']}")
    return {"_written": True, "rows": len(result["rows"])}


HANDLERS: Dict[str, Callable[[Any], Dict[str, Any]]] = {
    "validate": cmd_validate,
    "orbit": cmd_orbit,
    "periodic": cmd_periodic,
    "return-map": cmd_return_map,
    "renorm": cmd_renorm,
    "rotation": cmd_rotation,
    "classify": cmd_classify,
    "sweep": cmd_sweep,
}


def run(argv: Optional[List[str]] = None) -> int:
    """
    Execute one subcommand

    Args:
        argv: Command line arguments without the program name

    Returns:
        0 on success, 1 on invalid input, 2 on an internal invariant violation
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        _status(Fore.RED, "ERROR", f"usage: {exc}")
        return EXIT_INVALID
    _fill_defaults(args)
    logging.getLogger().setLevel(args.log_level)

    start_time = time.time()
    try:
        result = HANDLERS[args.command](args)
    except UsageError as exc:
        _status(Fore.RED, "ERROR", f"{args.command}: {exc}")
        return EXIT_INVALID
    except _SpecRejected as exc:
        _status(Fore.RED, "ERROR", f"{args.command}: {exc.diagnostics['message']}")
        _write(_dump({"command": args.command, "diagnostics": exc.diagnostics}), args.out)
        return EXIT_INVALID
    except InvariantViolation as exc:
        logger.error(f"Invariant violation in {args.command}: {exc.message}")
        _status(Fore.RED, "FAULT", f"{args.command}: {exc.message}")
        _write(_dump({"command": args.command, "error": exc.to_dict()}), args.out)
        return EXIT_INVARIANT
    except LorenzError as exc:
        _status(Fore.YELLOW, "FAILED", f"{args.command}: {exc.message}")
        _write(_dump({"command": args.command, "error": exc.to_dict()}), args.out)
        return EXIT_INVALID
    elapsed = time.time() - start_time

    exit_code = result.pop("_exit", EXIT_OK)
    if "_written" in result:
        _status(Fore.GREEN, "OK", f"sweep: {result['rows']} rows")
        return exit_code
    if "_text" in result:
        _write(result["_text"], args.out)
    else:
        summary = {
            "command": args.command,
            "seed": args.seed,
            "defaults": run_defaults(),
            "flags": {key: value for key, value in sorted(vars(args).items())
                      if key not in ("command", "out", "log_level", "timings", "explicit")},
            "stage_log": [args.command],
        }
        if args.timings:
            summary["total_execution_time_seconds"] = elapsed
        result["execution_summary"] = summary
        _write(_dump(result), args.out)

    if exit_code == EXIT_OK:
        label = result["report"]["kind"] if "report" in result else "done"
        _status(Fore.GREEN, "OK", f"{args.command}: {label} ({elapsed:.2f}s)")
    else:
        _status(Fore.YELLOW, "INVALID", f"{args.command}: see report")
    return exit_code


def main() -> int:
    colorama_init()
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
