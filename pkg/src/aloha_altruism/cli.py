"""Command-line entry point.

Exit codes:

0  success
2  usage error or malformed config
3  no equilibrium found / solver did not converge (diagnostics still printed)
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import reports
from .dynamics import FlowConfig, estimate_basins
from .equilibrium import (DEFAULT_SCAN_POINTS, SymmetricCondition, find_heterogeneous_neps,
                          find_symmetric_neps, symmetric_existence_report)
from .errors import NoRoot, NotConverged
from .game_model import AltruismMode, UtilityVariant, Variant
from .slot_sim import estimate_observables, simulate_slots
from .stability import stability_report

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3

log = logging.getLogger("aloha_altruism")


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")
    try:
        return [float(t) for t in items]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str) -> list[int]:
    values = _float_list(text)
    if any(v != int(v) or v < 2 for v in values):
        raise argparse.ArgumentTypeError("player counts must be integers >= 2")
    return [int(v) for v in values]


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_rows(rows, args, meta=None):
    """CSV or JSON; a CSV written to a file also gets a JSON twin next to it."""
    payload = {"rows": rows, **(meta or {})}
    if args.format == "json":
        _emit(reports.to_json(payload), args.out)
        return
    _emit(reports.to_csv(rows), args.out)
    if args.out:
        Path(args.out).with_suffix(".json").write_text(reports.to_json(payload))


def _load_config(args) -> cfgmod.RunConfig:
    if not args.config:
        raise UsageError("--config is required")
    run = cfgmod.load(args.config)
    if args.seed is not None:
        run.seed = args.seed
    return run


def _flow_config(run) -> FlowConfig:
    return FlowConfig(h=float(run.get("flow.h", 0.01)),
                      max_time=float(run.get("flow.max_time", 1e4)),
                      convergence_tol=float(run.get("flow.tol", 1e-8)))


def _solve(run):
    """NEPs for the configured game (symmetric roots when players are identical)."""
    spec = run.spec
    if spec.is_identical:
        p = spec.players[0]
        cond = SymmetricCondition(spec.variant, spec.N, p.a, p.c)
        scan = int(run.get("solver.scan_points", DEFAULT_SCAN_POINTS))
        return find_symmetric_neps(cond, scan, M=p.M, rates=list(spec.r))
    starts = run.get("solver.starts", [0.1, 0.5, 0.9])
    starts = starts if isinstance(starts, list) else [starts]
    neps = find_heterogeneous_neps(spec, starts, float(run.get("solver.damping", 0.5)),
                                   int(run.get("solver.max_iters", 10_000)))
    if not neps:
        raise NotConverged("best-response iteration did not converge from any start")
    return neps


# -- subcommands -------------------------------------------------------------


def cmd_curve(args) -> int:
    variant = UtilityVariant(Variant(args.variant), AltruismMode(args.altruism))
    rows = reports.curve_table(variant, args.N, args.a, args.c, args.points)
    _emit_rows(rows, args, {"variant": str(variant), "c": args.c})
    return EXIT_OK


def cmd_table(args) -> int:
    if args.name == "comparison":
        rows = reports.comparison_table()
    elif args.name == "heterogeneous":
        rows = reports.heterogeneous_table()
    else:
        rows = reports.basins_table(grid_per_dim=args.grid, workers=args.workers)
    _emit_rows(rows, args, {"table": args.name})
    return EXIT_OK


def cmd_solve(args) -> int:
    run = _load_config(args)
    try:
        neps = _solve(run)
    except NoRoot as exc:
        payload = {"status": "NoRoot", "message": str(exc),
                   "existence": exc.report.to_dict() if exc.report else None}
        _emit(reports.to_json(payload), args.out)
        return EXIT_NOT_CONVERGED
    except NotConverged as exc:
        payload = {"status": "NotConverged", "message": str(exc),
                   "last": None if exc.last is None else np.asarray(exc.last).tolist()}
        _emit(reports.to_json(payload), args.out)
        return EXIT_NOT_CONVERGED
    payload = {"status": "ok", "neps": [n.to_dict() for n in neps]}
    if run.spec.is_identical:
        p = run.spec.players[0]
        cond = SymmetricCondition(run.spec.variant, run.spec.N, p.a, p.c)
        payload["existence"] = symmetric_existence_report(cond).to_dict()
    _emit(reports.to_json(payload), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    run = _load_config(args)
    if run.q is None:
        raise UsageError("simulate needs a profile 'q' in the config")
    slots = int(run.get("sim.slots", 1_000_000))
    batch = simulate_slots(run.q, slots, run.seed, workers=int(run.get("sim.workers", 1)))
    observables = [estimate_observables(batch, i).__dict__ for i in range(len(run.q))]
    if args.format == "csv":
        rows = [{"player": i, "q": float(run.q[i]), "successes": int(batch.successes[i]),
                 **{k: float(v) for k, v in obs.items()}} for i, obs in enumerate(observables)]
        _emit(reports.to_csv(rows), args.out)
    else:
        _emit(reports.to_json({"batch": batch.to_dict(), "q": run.q, "observables": observables}),
              args.out)
    return EXIT_OK


def cmd_basins(args) -> int:
    run = _load_config(args)
    try:
        neps = _solve(run)
    except (NoRoot, NotConverged) as exc:
        _emit(reports.to_json({"status": type(exc).__name__, "message": str(exc)}), args.out)
        return EXIT_NOT_CONVERGED
    report = estimate_basins(run.spec, neps, int(run.get("basins.grid", 21)), _flow_config(run),
                             workers=int(run.get("basins.workers", 1)))
    _emit(reports.to_json({"status": "ok", **report.to_dict()}), args.out)
    return EXIT_OK


def cmd_stability(args) -> int:
    run = _load_config(args)
    convention = run.get("stability.convention", "proof")
    if run.q is not None:
        points = [np.asarray(run.q)]
    else:
        try:
            points = [n.q_star for n in _solve(run)]
        except (NoRoot, NotConverged) as exc:
            _emit(reports.to_json({"status": type(exc).__name__, "message": str(exc)}), args.out)
            return EXIT_NOT_CONVERGED
    out = [{"q": p.tolist(), **stability_report(run.spec, p, convention).to_dict()} for p in points]
    _emit(reports.to_json({"status": "ok", "points": out}), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aloha-altruism",
                                     description="Slotted-ALOHA game with dynamic altruism.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt="csv"):
        p.add_argument("--config", help="run configuration (key = value text or JSON)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt)

    p = sub.add_parser("curve", help="symmetric-equilibrium condition over q")
    common(p)
    p.add_argument("--variant", choices=[v.value for v in Variant], default="PowerLog")
    p.add_argument("--altruism", choices=[m.value for m in AltruismMode], default="Dynamic")
    p.add_argument("--N", type=_int_list, required=True, help="comma-separated player counts")
    p.add_argument("--a", type=_float_list, required=True, help="comma-separated altruism weights")
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--points", type=int, default=1000)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("table", help="regenerate a numerical study table")
    common(p)
    p.add_argument("name", choices=("comparison", "heterogeneous", "basins"))
    p.add_argument("--grid", type=int, default=21, help="seeds per dimension (basins)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_table)

    for name, func, fmt in (("solve", cmd_solve, "json"), ("simulate", cmd_simulate, "json"),
                            ("basins", cmd_basins, "json"), ("stability", cmd_stability, "json")):
        p = sub.add_parser(name)
        common(p, fmt)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "points", 1000) < 2:
        parser.error("--points must be >= 2")
    try:
        return args.func(args)
    except (UsageError, cfgmod.ConfigError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
