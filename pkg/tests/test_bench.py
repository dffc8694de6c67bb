import csv
import subprocess
import sys

import pytest

from apf_mapf.bench import (
    SolverSpec,
    SpecError,
    compute_rsoc,
    instance_seed,
    parse_spec,
    run_experiment,
    sweep_spec,
)
from apf_mapf.cli import main
from apf_mapf.lifelong import parse_event_log

LIFELONG = """
[experiment]
mode = lifelong
maps = random-32-32-10
agents = 20
instances = 2
seed = 7
solvers = pibt+apf
event_logs = yes

[lifelong]
steps = 20
"""

ONESHOT = """
[experiment]
mode = oneshot
maps = empty-32-32
agents = 10
instances = 2
seed = 1
time_limit = 20
solvers = prp/astar, prp/astar+apf
"""


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_solver_spec_syntax():
    assert SolverSpec.parse("lns2/sipps+apf") == SolverSpec("lns2", "sipps", True)
    assert SolverSpec.parse("PIBT").id == "pibt"
    assert SolverSpec.parse("prp").low_level == "astar"
    for bad in ("foo", "pibt/astar", "prp/dijkstra"):
        with pytest.raises(SpecError):
            SolverSpec.parse(bad)


@pytest.mark.parametrize("text", [
    "[lifelong]\nsteps=5\n",
    "[experiment]\nmaps = nowhere.map\nagents = 5\nsolvers = pibt\n",
    "[experiment]\nmaps = empty-32-32\nagents = 0\nsolvers = pibt\n",
    "[experiment]\nmaps = empty-32-32\nagents = 5\nsolvers = pibt\nmode = weird\n",
    "[experiment]\nmaps = empty-32-32\nagents = 5\nsolvers = pibt\n[apf.pibt]\nradius = 2\n",
])
def test_invalid_specs(text):
    with pytest.raises(SpecError):
        parse_spec(text)


def test_spec_overrides_presets():
    spec = parse_spec(LIFELONG + "\n[apf.pibt]\ngamma = 2\nd_max = 3\n")
    p = spec.params_for(spec.solvers[0])
    assert (p.gamma, p.d_max, p.w) == (2.0, 3, 0.1)


def test_instance_seeds_are_paired_and_distinct():
    assert instance_seed(0, "m", 10, 1) == instance_seed(0, "m", 10, 1)
    assert len({instance_seed(0, "m", 10, i) for i in range(50)}) == 50


def test_lifelong_rows_logs_and_rerun(tmp_path):
    spec = parse_spec(LIFELONG)
    out = run_experiment(spec, tmp_path / "a")
    rows = read_rows(out / "rows.csv")
    assert len(rows) == 2
    for r in rows:
        name = f"random-32-32-10__pibt+apf__base__20__{r['instance']}.log"
        events = parse_event_log((out / "logs" / name).read_text())
        assert sum(len(ids) for _, _, ids in events) == int(r["throughput"])
    run_experiment(spec, tmp_path / "b")
    assert (tmp_path / "a" / "rows.csv").read_bytes() == (tmp_path / "b" / "rows.csv").read_bytes()
    (agg,) = read_rows(out / "aggregates.csv")
    assert float(agg["mean_throughput"]) >= 0 and agg["n"] == "2"


def test_resume_skips_existing_rows(tmp_path):
    spec = parse_spec(ONESHOT)
    out = run_experiment(spec, tmp_path)
    full = (out / "rows.csv").read_bytes()
    lines = full.decode().splitlines(keepends=True)
    # drop the last row; only that one is recomputed
    (out / "rows.csv").write_text("".join(lines[:-1]))
    calls = []
    run_experiment(spec, out, progress=calls.append)
    assert len(calls) == 1
    assert (out / "rows.csv").read_bytes() == full


def test_oneshot_aggregates_include_rsoc(tmp_path):
    out = run_experiment(parse_spec(ONESHOT), tmp_path)
    aggs = {r["solver"]: r for r in read_rows(out / "aggregates.csv")}
    assert aggs["prp/astar"]["rsoc"] == ""
    assert float(aggs["prp/astar+apf"]["rsoc"]) > 0
    assert 0 <= float(aggs["prp/astar"]["success_rate"]) <= 1


def _row(i, soc, solved=1):
    return {"instance": i, "soc": soc, "solved": solved}


def test_rsoc_examples():
    assert compute_rsoc([_row(0, 12), _row(1, 30)], [_row(0, 12), _row(1, 30)]) == 1.0
    assert compute_rsoc([_row(0, 10), _row(1, 10)], [_row(0, 20), _row(1, 20)]) == 0.5
    assert compute_rsoc([_row(0, 10), _row(1, "", 0)], [_row(0, "", 0), _row(1, 20)]) is None
    # only commonly solved instances count
    assert compute_rsoc([_row(0, 10), _row(1, 99)], [_row(0, 20), _row(1, "", 0)]) == 0.5


def test_sweep_multiplies_cells():
    base = parse_spec("""
[experiment]
maps = empty-32-32
agents = 10, 20
solvers = pibt, pibt+apf, lacam+apf, prp/astar+apf, lns2/sipps+apf
""")
    assert len(base.cells()) == 10
    swept = sweep_spec(base, "w", [0, 0.5, 1])
    assert len(swept.cells()) == 30
    assert {c.tag for c in swept.cells()} == {"w=0", "w=0.5", "w=1"}
    with pytest.raises(SpecError):
        sweep_spec(base, "radius", [1])
    with pytest.raises(SpecError):
        sweep_spec(parse_spec("[experiment]\nmaps = empty-32-32\nagents = 5\nsolvers = prp\n"), "w", [1])


def test_zero_weight_sweep_matches_vanilla(tmp_path):
    spec = parse_spec(LIFELONG.replace("pibt+apf", "pibt, pibt+apf").replace("event_logs = yes", ""))
    out = run_experiment(sweep_spec(spec, "w", [0]), tmp_path)
    rows = read_rows(out / "rows.csv")
    van = {r["instance"]: r for r in rows if r["solver"] == "pibt"}
    apf = {r["instance"]: r for r in rows if r["solver"] == "pibt+apf"}
    assert van and set(van) == set(apf)
    for i in van:
        for key in ("seed", "throughput", "failures"):
            assert van[i][key] == apf[i][key]


def test_parallel_rows_match_serial(tmp_path):
    spec = parse_spec(ONESHOT)
    a = run_experiment(spec, tmp_path / "serial")
    b = run_experiment(spec, tmp_path / "parallel", jobs=2)
    assert (a / "rows.csv").read_bytes() == (b / "rows.csv").read_bytes()


def test_cli_solve_and_lifelong(tmp_path, capsys):
    assert main(["solve", "--map", "random-32-32-10", "--agents", "10", "--solver", "prp", "--apf",
                 "--out", str(tmp_path)]) == 0
    assert "conflicts=0" in capsys.readouterr().out
    assert len((tmp_path / "paths.txt").read_text().splitlines()) == 10
    assert main(["lifelong", "--map", "empty-32-32", "--agents", "10", "--solver", "pibt", "--apf",
                 "--gamma", "2", "--steps", "20", "--out", str(tmp_path)]) == 0
    assert "throughput=" in capsys.readouterr().out
    assert len(parse_event_log((tmp_path / "events.log").read_text())) == 21


def test_cli_bench_and_errors(tmp_path, capsys):
    spec = tmp_path / "spec.ini"
    spec.write_text(ONESHOT)
    assert main(["bench", str(spec), "--out", str(tmp_path / "out")]) == 0
    assert len(read_rows(tmp_path / "out" / "rows.csv")) == 4
    assert main(["sweep", str(spec), "--param", "w", "--values", "0,1", "--out", str(tmp_path / "sw")]) == 0
    assert len(read_rows(tmp_path / "sw" / "rows.csv")) == 8
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nmaps = nope\n")
    assert main(["bench", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert "error:" in capsys.readouterr().err


def test_console_entry_point_runs():
    res = subprocess.run([sys.executable, "-m", "apf_mapf.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "lifelong" in res.stdout
