"""Experiment harness: solver matrices, result rows, aggregates, RSOC, sweeps.

Experiment specs are INI files::

    [experiment]
    mode = lifelong              ; or oneshot
    maps = empty-32-32, room-32-32-4
    agents = 50, 100, 150
    instances = 2
    seed = 0
    time_limit = 60              ; one-shot seconds per instance
    solvers = pibt, pibt+apf, lns2/astar, lns2/astar+apf

    [lifelong]
    window = 5
    horizon = 5
    steps = 100
    deadline = 10                ; seconds per planning episode
    max_iterations = 200         ; optional LNS2 repair budget per episode

    [apf.pibt]                   ; optional overrides of the presets
    gamma = 2

Solver entries read ``family[/low_level][+apf]``. APF parameter sections are
``apf.astar``, ``apf.sipps`` (PrP and LNS2 by low level), ``apf.pibt`` (PIBT
and LaCAM) and ``apf.dapf``.

Output files (all with fixed column order):

* ``rows.csv``      one row per matrix cell and instance, byte-deterministic
* ``runtimes.csv``  wall-clock runtime of each row (not deterministic)
* ``aggregates.csv`` per-cell means, success rate, runtime percentiles, RSOC
"""
from __future__ import annotations

import configparser
import csv
import random
import statistics
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, replace
from pathlib import Path

from .apf import ASTAR_PRESET, PIBT_PRESET, SIPPS_PRESET, APFParams
from .grid import GridMap, parse_scen
from .lifelong import LifelongConfig, run_lifelong, write_event_log
from .maps import resolve_map
from .solvers import DAPF_PRESET, SOLVERS, MapfInstance, solve, validate

ROW_FIELDS = [
    "map", "solver", "family", "low_level", "apf", "params", "tag", "agents", "instance", "seed",
    "mode", "solved", "soc", "throughput", "failures",
]
RUNTIME_FIELDS = ["map", "solver", "tag", "agents", "instance", "runtime"]
AGGREGATE_FIELDS = [
    "map", "solver", "tag", "agents", "n", "success_rate", "mean_soc", "mean_throughput",
    "runtime_p50", "runtime_p90", "rsoc",
]
SWEEP_PARAMS = ("w", "gamma", "d_max", "t_max")


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class SolverSpec:
    family: str
    low_level: str = "astar"
    apf: bool = False

    @classmethod
    def parse(cls, text: str) -> "SolverSpec":
        text = text.strip().lower()
        apf = text.endswith("+apf")
        if apf:
            text = text[: -len("+apf")]
        family, _, low = text.partition("/")
        if family not in SOLVERS:
            raise SpecError(f"unknown solver family {family!r}")
        if family in ("prp", "lns2"):
            low = low or "astar"
            if low not in ("astar", "sipps"):
                raise SpecError(f"unknown low-level planner {low!r}")
        elif low:
            raise SpecError(f"{family} has no low-level planner")
        else:
            low = "-"
        return cls(family, low, apf)

    @property
    def id(self) -> str:
        base = self.family if self.low_level == "-" else f"{self.family}/{self.low_level}"
        return base + ("+apf" if self.apf else "")

    @property
    def preset_key(self) -> str:
        if self.family in ("prp", "lns2"):
            return self.low_level
        if self.family in ("pibt", "lacam"):
            return "pibt"
        return "dapf"


PRESETS = {"astar": ASTAR_PRESET, "sipps": SIPPS_PRESET, "pibt": PIBT_PRESET, "dapf": DAPF_PRESET}


@dataclass(frozen=True)
class ExperimentSpec:
    maps: tuple[str, ...]
    agents: tuple[int, ...]
    solvers: tuple[SolverSpec, ...]
    instances: int = 1
    mode: str = "lifelong"
    seed: int = 0
    time_limit: float = 60.0
    lifelong: LifelongConfig = LifelongConfig()
    max_iterations: int | None = None
    apf_params: tuple[tuple[str, APFParams], ...] = tuple(sorted(PRESETS.items()))
    scen: str | None = None
    variants: tuple[tuple[str, tuple[tuple[str, float], ...]], ...] = (("", ()),)
    event_logs: bool = False

    def __post_init__(self) -> None:
        if self.mode not in ("lifelong", "oneshot"):
            raise SpecError("mode must be 'lifelong' or 'oneshot'")
        if not self.maps or not self.agents or not self.solvers:
            raise SpecError("maps, agents and solvers must be non-empty")
        if any(k <= 0 for k in self.agents):
            raise SpecError("agent counts must be positive")
        if self.instances <= 0:
            raise SpecError("instances must be positive")
        for m in self.maps:
            try:
                load_grid(m)
            except (OSError, ValueError) as exc:
                raise SpecError(f"cannot read map {m!r}: {exc}") from exc

    def params_for(self, solver: SolverSpec, overrides: Iterable[tuple[str, float]] = ()) -> APFParams | None:
        if not solver.apf and solver.family != "dapf":
            return None
        params = dict(self.apf_params)[solver.preset_key]
        changes = {k: (int(v) if k in ("d_max", "t_max") else float(v)) for k, v in overrides}
        return params.with_(**changes) if changes else params

    def cells(self) -> list["Cell"]:
        out = []
        for tag, overrides in self.variants:
            for m in self.maps:
                for solver in self.solvers:
                    for k in self.agents:
                        out.append(Cell(m, solver, k, tag, overrides))
        return out


@dataclass(frozen=True)
class Cell:
    map: str
    solver: SolverSpec
    agents: int
    tag: str = ""
    overrides: tuple[tuple[str, float], ...] = ()


def load_grid(name: str) -> GridMap:
    return resolve_map(name)


def instance_seed(master: int, map_name: str, agents: int, instance: int) -> int:
    """Seed of one instance; shared by every solver so results are paired."""
    return random.Random(f"{master}:{map_name}:{agents}:{instance}").getrandbits(31)


def _list(value: str) -> list[str]:
    return [v.strip() for v in value.replace("\n", ",").split(",") if v.strip()]


def parse_spec(text: str) -> ExperimentSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SpecError(str(exc)) from exc
    if "experiment" not in cp:
        raise SpecError("missing [experiment] section")
    ex = cp["experiment"]
    try:
        lf = cp["lifelong"] if "lifelong" in cp else {}
        cfg = LifelongConfig(
            window=int(lf.get("window", 5)),
            horizon=int(lf.get("horizon", 5)),
            step_limit=int(lf.get("steps", 100)),
            planning_deadline=float(lf.get("deadline", 10.0)),
        )
        max_it = lf.get("max_iterations")
        presets = dict(PRESETS)
        for key in presets:
            sec = f"apf.{key}"
            if sec in cp:
                changes = {}
                for name, val in cp[sec].items():
                    if name not in SWEEP_PARAMS:
                        raise SpecError(f"unknown APF parameter {name!r} in [{sec}]")
                    changes[name] = int(val) if name in ("d_max", "t_max") else float(val)
                presets[key] = presets[key].with_(**changes)
        return ExperimentSpec(
            maps=tuple(_list(ex.get("maps", ""))),
            agents=tuple(int(a) for a in _list(ex.get("agents", ""))),
            solvers=tuple(SolverSpec.parse(s) for s in _list(ex.get("solvers", ""))),
            instances=int(ex.get("instances", 1)),
            mode=ex.get("mode", "lifelong").strip(),
            seed=int(ex.get("seed", 0)),
            time_limit=float(ex.get("time_limit", 60.0)),
            lifelong=cfg,
            max_iterations=int(max_it) if max_it else None,
            apf_params=tuple(sorted(presets.items())),
            scen=ex.get("scen") or None,
            event_logs=ex.getboolean("event_logs", fallback=False),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(str(exc)) from exc


def load_spec(path: str | Path) -> ExperimentSpec:
    return parse_spec(Path(path).read_text())


def make_instance(grid: GridMap, agents: int, seed: int, scen_path: str | None = None) -> MapfInstance:
    if scen_path is not None:
        entries = parse_scen(Path(scen_path).read_text(), grid)
        if len(entries) < agents:
            raise ValueError(f"scenario has only {len(entries)} agents")
        entries = entries[:agents]
        return MapfInstance.from_coords(grid, [e.start for e in entries], [e.goal for e in entries], seed)
    free = grid.free_cells()
    if agents > len(free):
        raise ValueError("more agents than free cells")
    rng = random.Random(f"instance:{seed}")
    starts = rng.sample(free, agents)
    goals = rng.sample(free, agents)
    return MapfInstance(grid, starts, goals, seed)


def _fmt_params(p: APFParams | None) -> str:
    if p is None:
        return ""
    return f"w={p.w:g};gamma={p.gamma:g};d_max={p.d_max};t_max={p.t_max}"


def run_cell_instance(spec: ExperimentSpec, cell: Cell, instance: int, log_dir: str | None = None) -> tuple[dict, float]:
    """One result row and its runtime."""
    grid = load_grid(cell.map)
    seed = instance_seed(spec.seed, cell.map, cell.agents, instance)
    params = spec.params_for(cell.solver, cell.overrides)
    row = {
        "map": cell.map, "solver": cell.solver.id, "family": cell.solver.family,
        "low_level": cell.solver.low_level, "apf": int(cell.solver.apf), "params": _fmt_params(params),
        "tag": cell.tag, "agents": cell.agents, "instance": instance, "seed": seed, "mode": spec.mode,
        "solved": "", "soc": "", "throughput": "", "failures": "",
    }
    t0 = time.perf_counter()
    if spec.mode == "oneshot":
        inst = make_instance(grid, cell.agents, seed, spec.scen)
        sol = solve(inst, cell.solver.family, cell.solver.low_level, params, time_limit=spec.time_limit)
        if sol.solved and validate(sol.paths):
            raise RuntimeError(f"{cell.solver.id} returned an invalid solution")
        row["solved"] = int(sol.solved)
        row["soc"] = sol.soc if sol.solved else ""
    else:
        cfg = replace(spec.lifelong, seed=seed)
        options = {}
        if cell.solver.family == "lns2" and spec.max_iterations is not None:
            options["max_iterations"] = spec.max_iterations
        metrics, log = run_lifelong(
            grid, cell.agents, cell.solver.family, cell.solver.low_level, params, cfg, planner_options=options
        )
        row["throughput"] = metrics.throughput
        row["failures"] = metrics.failure_count
        if log_dir is not None:
            name = f"{cell.map}__{cell.solver.id.replace('/', '-')}__{cell.tag or 'base'}__{cell.agents}__{instance}.log"
            write_event_log(log, grid, Path(log_dir) / name)
    return row, time.perf_counter() - t0


def _row_key(row: dict) -> tuple:
    return (str(row["map"]), str(row["solver"]), str(row["tag"]), int(row["agents"]), int(row["instance"]))


def _read_csv(path: Path) -> list[dict]:
    if not path.exists():
        return []
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def _write_csv(path: Path, fields: Sequence[str], rows: Iterable[dict]) -> None:
    tmp = path.with_suffix(".tmp")
    with tmp.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in fields})
    tmp.replace(path)


def _append_csv(path: Path, fields: Sequence[str], row: dict) -> None:
    new = not path.exists()
    with path.open("a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        if new:
            w.writeheader()
        w.writerow({k: row.get(k, "") for k in fields})


def _task(args):
    spec, cell, instance, log_dir = args
    return run_cell_instance(spec, cell, instance, log_dir)


def run_experiment(spec: ExperimentSpec, out_dir: str | Path, jobs: int = 1, progress=None) -> Path:
    """Execute every missing (cell, instance) and write the CSV files.

    Rows already present in ``rows.csv`` are kept and not recomputed, so an
    interrupted run resumes where it stopped. Results are appended as they
    arrive; the final files are rewritten in matrix order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows_path, rt_path = out / "rows.csv", out / "runtimes.csv"
    log_dir = None
    if spec.event_logs and spec.mode == "lifelong":
        log_dir = out / "logs"
        log_dir.mkdir(exist_ok=True)
    done = {_row_key(r): r for r in _read_csv(rows_path)}
    runtimes = {_row_key(r): r for r in _read_csv(rt_path)}
    todo = []
    order = []
    for cell in spec.cells():
        for i in range(spec.instances):
            key = (cell.map, cell.solver.id, cell.tag, cell.agents, i)
            order.append(key)
            if key not in done:
                todo.append((spec, cell, i, str(log_dir) if log_dir else None))

    def record(row, runtime):
        key = _row_key(row)
        done[key] = row
        rt = {"map": row["map"], "solver": row["solver"], "tag": row["tag"], "agents": row["agents"],
              "instance": row["instance"], "runtime": f"{runtime:.4f}"}
        runtimes[key] = rt
        _append_csv(rows_path, ROW_FIELDS, row)
        _append_csv(rt_path, RUNTIME_FIELDS, rt)
        if progress is not None:
            progress(row)

    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_task, t) for t in todo]
            for fut in as_completed(futures):
                record(*fut.result())
    else:
        for t in todo:
            record(*_task(t))

    rows = [done[k] for k in order if k in done]
    _write_csv(rows_path, ROW_FIELDS, rows)
    _write_csv(rt_path, RUNTIME_FIELDS, [runtimes[k] for k in order if k in runtimes])
    _write_csv(out / "aggregates.csv", AGGREGATE_FIELDS, aggregate(rows, [runtimes.get(k) for k in order if k in done]))
    return out


def compute_rsoc(rows_apf: Sequence[dict], rows_vanilla: Sequence[dict]) -> float | None:
    """SOC ratio over instances solved by both variants; ``None`` if there are none."""
    def solved(rows):
        return {int(r["instance"]): float(r["soc"]) for r in rows if str(r["solved"]) in ("1", "True", "true")}

    a, v = solved(rows_apf), solved(rows_vanilla)
    common = sorted(set(a) & set(v))
    if not common:
        return None
    den = sum(v[i] for i in common)
    if den == 0:
        return None
    return sum(a[i] for i in common) / den


def _percentile(xs: Sequence[float], q: float) -> float:
    xs = sorted(xs)
    if len(xs) == 1:
        return xs[0]
    return statistics.quantiles(xs, n=100, method="inclusive")[int(q) - 1]


def aggregate(rows: Sequence[dict], runtimes: Sequence[dict | None] = ()) -> list[dict]:
    rt_by_key = {}
    for r in runtimes:
        if r is not None:
            rt_by_key[_row_key(r)] = float(r["runtime"])
    cells: dict[tuple, list[dict]] = {}
    for r in rows:
        cells.setdefault((r["map"], r["solver"], r["tag"], int(r["agents"])), []).append(r)
    out = []
    for (m, solver, tag, k), rs in cells.items():
        rec = {"map": m, "solver": solver, "tag": tag, "agents": k, "n": len(rs)}
        if rs[0]["mode"] == "oneshot":
            solved = [r for r in rs if str(r["solved"]) in ("1", "True")]
            rec["success_rate"] = f"{len(solved) / len(rs):.4f}"
            if solved:
                rec["mean_soc"] = f"{statistics.fmean(float(r['soc']) for r in solved):.2f}"
            if solver.endswith("+apf"):
                vanilla = cells.get((m, solver[: -len("+apf")], tag, k))
                if vanilla is not None:
                    ratio = compute_rsoc(rs, vanilla)
                    if ratio is not None:
                        rec["rsoc"] = f"{ratio:.4f}"
        else:
            rec["mean_throughput"] = f"{statistics.fmean(float(r['throughput']) for r in rs):.2f}"
        times = [rt_by_key[_row_key(r)] for r in rs if _row_key(r) in rt_by_key]
        if times:
            rec["runtime_p50"] = f"{_percentile(times, 50):.4f}"
            rec["runtime_p90"] = f"{_percentile(times, 90):.4f}"
        out.append(rec)
    return out


def sweep_spec(base: ExperimentSpec, parameter: str, values: Sequence[float]) -> ExperimentSpec:
    """``base`` with one tagged variant per value of an APF parameter."""
    if parameter not in SWEEP_PARAMS:
        raise SpecError(f"parameter must be one of {SWEEP_PARAMS}")
    if not any(s.apf or s.family == "dapf" for s in base.solvers):
        raise SpecError("no solver in the spec uses APF parameters")
    if parameter == "t_max" and not any(s.family in ("pibt", "lacam") for s in base.solvers):
        raise SpecError("t_max only affects PIBT and LaCAM")
    variants = tuple((f"{parameter}={v:g}", ((parameter, v),)) for v in values)
    return replace(base, variants=variants)


def sweep_params(base: ExperimentSpec, parameter: str, values: Sequence[float], out_dir: str | Path, jobs: int = 1) -> Path:
    return run_experiment(sweep_spec(base, parameter, values), out_dir, jobs)
