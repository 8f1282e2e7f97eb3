"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Any, Mapping, Sequence

from .analysis import SweepSpec, run_sweep
from .dynamics import build_chain, solve_equilibrium
from .errors import (CafeError, CommandConflictError, ConfigError, DomainError,
                     InfeasibleError, NonConvergenceError, NumericalInstabilityError,
                     OutOfRangeError, ValidationError)
from .kinematics import NoiseModel
from .model import (collect_issues, default_paper_config, load_document, parse_quantity,
                    scenario_from_document, system_from_document)
from .simulation import simulate

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

_INVALID = (ConfigError, ValidationError, DomainError, CommandConflictError,
            OutOfRangeError, InfeasibleError)
_NUMERIC = (NonConvergenceError, NumericalInstabilityError)  # exit 2


def _read_document(path: str) -> dict:
    return load_document(Path(path).read_text())


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _run_options(doc: Mapping[str, Any], args) -> tuple[float, float | None, NoiseModel | None]:
    sim = doc.get("simulation") or {}
    if not isinstance(sim, Mapping):
        raise ConfigError("simulation", "must be a mapping")
    for key in sim:
        if key not in ("dt_s", "duration_s"):
            raise ConfigError(f"simulation.{key}", "unknown key")
    dt = args.dt if args.dt is not None else parse_quantity(
        sim.get("dt_s", 1e-3), "time", "s", "simulation.dt_s")
    duration = args.duration
    if duration is None and "duration_s" in sim:
        duration = parse_quantity(sim["duration_s"], "time", "s", "simulation.duration_s")
    if not (dt > 0 and math.isfinite(dt)):
        raise ValidationError("--dt", f"must be > 0, got {dt!r}")
    if duration is not None and not duration >= 0:
        raise ValidationError("--duration", f"must be >= 0, got {duration!r}")
    noise = None
    if args.noise or args.seed is not None:
        nd = doc.get("noise") or {}
        if not isinstance(nd, Mapping):
            raise ConfigError("noise", "must be a mapping")
        for key in nd:
            if key not in ("drive_bias_sigma", "event_sigma_m"):
                raise ConfigError(f"noise.{key}", "unknown key")
        try:
            noise = NoiseModel(**{("event_sigma" if k == "event_sigma_m" else k): float(v)
                                  for k, v in nd.items()})
        except DomainError as exc:
            raise ValidationError("noise", str(exc)) from None
    return dt, duration, noise


def cmd_simulate(args) -> int:
    doc = _read_document(args.config)
    scenario = scenario_from_document(doc)
    dt, duration, noise = _run_options(doc, args)
    seed = 0 if args.seed is None else args.seed
    result = simulate(scenario, dt=dt, duration=duration, noise=noise, seed=seed)
    _write(args.out, result.trace.to_csv())
    report = sys.stdout if args.out not in (None, "-") else sys.stderr
    for line in result.summary.lines():
        print(line, file=report)
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    if args.config is None:
        scenario = default_paper_config()
    else:
        scenario = scenario_from_document(_read_document(args.config))
    if not scenario.cafes:
        print("no platforms on the cable")
        return EXIT_OK
    chain = build_chain(scenario.system, scenario.cafes)
    eq = solve_equilibrium(chain, scenario.cafes, dt=args.dt)
    lines = []
    for i, z in eq.sag().items():
        lines.append(f"cafe {i}: sag = {-z * 1e3:.4f} mm")
    f = eq.forces
    for j, t in enumerate(f.tension_per_cable):
        lines.append(f"segment {j}: tension = {t:.6g} N per cable ({t * f.cables:.6g} N total)")
    for k, cafe_id in enumerate(f.cafe_ids):
        lines.append(f"cafe {cafe_id}: horizontal residual = {f.horizontal_residual[k]:.3e} N")
    lines.append(f"vertical residual = {eq.residual:.3e} N after {eq.steps} steps")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = _read_document(args.config)
    spec = SweepSpec.from_document(doc)
    base = system_from_document(doc) if "system" in doc else default_paper_config().system
    result = run_sweep(spec, base)
    _write(args.out, result.to_csv())
    report = sys.stdout if args.out not in (None, "-") else sys.stderr
    failed = [c for c in result.cells if not c.converged]
    print(f"{len(result.cells)} cells, {len(failed)} not converged", file=report)
    for c in failed:
        print(f"  span {c.span:g} m, {c.count} platforms, {c.pretension:g} N: {c.message}",
              file=report)
    for issue in result.monotonicity_violations():
        print(f"warning: {issue}", file=report)
    return EXIT_OK


def cmd_validate(args) -> int:
    issues = collect_issues(_read_document(args.config))
    for issue in issues:
        print(issue)
    if issues:
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cafes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario and write a CSV trace")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--out", metavar="PATH", help="trace file (default: stdout)")
    p.add_argument("--dt", type=float, metavar="SECONDS")
    p.add_argument("--duration", type=float, metavar="SECONDS")
    p.add_argument("--seed", type=int, metavar="N", help="noise seed (implies --noise)")
    p.add_argument("--noise", action="store_true", help="enable open-loop noise")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equilibrium", help="report static sag and tensions")
    p.add_argument("--config", metavar="PATH", help="scenario (default: desk rig)")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--dt", type=float, metavar="SECONDS", help="relaxation step")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("sweep", help="sag/tension grid over span, count, pretension")
    p.add_argument("--config", required=True, metavar="PATH", help="sweep spec")
    p.add_argument("--out", metavar="PATH", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check a scenario without running it")
    p.add_argument("--config", required=True, metavar="PATH")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _INVALID as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except _NUMERIC as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CafeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
