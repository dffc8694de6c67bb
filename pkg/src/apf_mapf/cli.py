"""Command-line entry point: ``apf-mapf {solve,lifelong,bench,sweep}``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import PRESETS, SpecError, SolverSpec, load_spec, make_instance, run_experiment, sweep_spec
from .lifelong import LifelongConfig, run_lifelong, write_event_log
from .maps import resolve_map
from .solvers import SOLVERS, solve, validate


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", required=True, help="bundled map name or path to a .map file")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--solver", choices=SOLVERS, default="pibt")
    p.add_argument("--low-level", choices=("astar", "sipps"), default="astar")
    p.add_argument("--apf", action="store_true", help="enable APF (preset parameters unless overridden)")
    p.add_argument("--w", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--dmax", type=int)
    p.add_argument("--tmax", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)


def _solver_and_params(args):
    text = args.solver + (f"/{args.low_level}" if args.solver in ("prp", "lns2") else "") + ("+apf" if args.apf else "")
    solver = SolverSpec.parse(text)
    if not solver.apf and solver.family != "dapf":
        return solver, None
    params = PRESETS[solver.preset_key]
    changes = {k: v for k, v in (("w", args.w), ("gamma", args.gamma), ("d_max", args.dmax), ("t_max", args.tmax)) if v is not None}
    return solver, params.with_(**changes) if changes else params


def cmd_solve(args) -> int:
    grid = resolve_map(args.map)
    solver, params = _solver_and_params(args)
    inst = make_instance(grid, args.agents, args.seed, args.scen)
    sol = solve(inst, solver.family, solver.low_level, params, time_limit=args.time_limit, max_steps=args.max_steps)
    conflicts = validate(sol.paths)
    print(f"solver={solver.id} agents={args.agents} solved={sol.solved} "
          f"soc={sol.soc if sol.solved else '-'} conflicts={len(conflicts) if sol.solved else '-'} "
          f"runtime={sol.elapsed:.3f}s")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        lines = [" ".join(f"{r},{c}" for r, c in (grid.coord(v) for v in p)) for p in sol.paths]
        (args.out / "paths.txt").write_text("\n".join(lines) + "\n")
    return 0 if sol.solved else 1


def cmd_lifelong(args) -> int:
    grid = resolve_map(args.map)
    solver, params = _solver_and_params(args)
    cfg = LifelongConfig(args.window, args.horizon, args.steps, args.time_limit, args.seed)
    options = {"max_iterations": args.max_iterations} if solver.family == "lns2" and args.max_iterations else {}
    metrics, log = run_lifelong(grid, args.agents, solver.family, solver.low_level, params, cfg, planner_options=options)
    print(f"solver={solver.id} agents={args.agents} throughput={metrics.throughput} "
          f"failures={metrics.failure_count} avg_episode={metrics.avg_runtime_per_episode:.3f}s")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        write_event_log(log, grid, args.out / "events.log")
    return 0


def cmd_bench(args) -> int:
    spec = load_spec(args.spec)
    out = run_experiment(spec, args.out, jobs=args.jobs, progress=_progress if args.verbose else None)
    print(f"results written to {out}")
    return 0


def cmd_sweep(args) -> int:
    spec = sweep_spec(load_spec(args.spec), args.param, [float(v) for v in args.values.split(",")])
    out = run_experiment(spec, args.out, jobs=args.jobs, progress=_progress if args.verbose else None)
    print(f"results written to {out}")
    return 0


def _progress(row) -> None:
    print(f"{row['map']} {row['solver']} {row['tag']} k={row['agents']} #{row['instance']} "
          f"solved={row['solved']} soc={row['soc']} throughput={row['throughput']}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apf-mapf", description="APF-augmented MAPF and lifelong MAPF solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one one-shot instance")
    _add_solver_args(p)
    p.add_argument("--scen", help="MovingAI .scen file (first --agents entries)")
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--max-steps", type=int, default=1000, help="step cap for PIBT and DAPF")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("lifelong", help="run one lifelong simulation")
    _add_solver_args(p)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--horizon", type=int, default=5)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--time-limit", type=float, default=10.0, help="planning seconds per episode")
    p.add_argument("--max-iterations", type=int, help="LNS2 repair budget per episode")
    p.set_defaults(func=cmd_lifelong)

    for name, func in (("bench", cmd_bench), ("sweep", cmd_sweep)):
        p = sub.add_parser(name, help="run an experiment spec file" if name == "bench" else "sweep one APF parameter")
        p.add_argument("spec", type=Path)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out", type=Path, required=True)
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "sweep":
            p.add_argument("--param", choices=("w", "gamma", "d_max", "t_max"), required=True)
            p.add_argument("--values", required=True, help="comma-separated values")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
