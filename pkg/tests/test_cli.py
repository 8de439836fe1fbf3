import csv
import json

import numpy as np
import pytest

from cpal import cli, trees
from cpal.equilibrium import SolverError
from cpal.tree import dump_tree


@pytest.fixture
def fruit(tmp_path):
    p = tmp_path / "fruit.json"
    dump_tree(trees.fruit_raw_tree(), p)
    return p


@pytest.fixture
def three_eq(tmp_path):
    p = tmp_path / "three.json"
    dump_tree(trees.multiplicity_tree(), p)
    return p


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_reduce_is_a_fixed_point(fruit, tmp_path, capsys):
    assert run("reduce", fruit, "--out", tmp_path / "a") == 0
    assert "apples" in capsys.readouterr().out
    assert run("reduce", tmp_path / "a" / "reduced.json", "--out", tmp_path / "b", "--quiet") == 0
    first = (tmp_path / "a" / "reduced.json").read_bytes()
    assert first == (tmp_path / "b" / "reduced.json").read_bytes()
    assert capsys.readouterr().out == ""


def test_simulate_writes_csv_deterministically(three_eq, tmp_path):
    args = ["simulate", three_eq, "--beta", 5, "--horizon", 500, "--seed", 3, "--quiet"]
    assert run(*args, "--out", tmp_path / "a") == 0
    assert run(*args, "--out", tmp_path / "b") == 0
    for name in ("trajectory.csv", "events.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = list(csv.reader(open(tmp_path / "a" / "trajectory.csv")))
    assert rows[0] == ["t", "v_L", "v_R"] and len(rows) == 502


def test_simulate_batch_and_raw_mode(fruit, tmp_path):
    assert run("simulate", fruit, "--beta", 1, "--horizon", 100, "--mode", "raw", "--runs", 4,
               "--out", tmp_path, "--quiet") == 0
    rows = list(csv.reader(open(tmp_path / "terminal.csv")))
    assert rows[0] == ["run", "v_apples", "v_citrus"] and len(rows) == 5


def test_raw_mode_rejects_reduced_input(three_eq, tmp_path, capsys):
    assert run("simulate", three_eq, "--beta", 1, "--mode", "raw", "--out", tmp_path) == 2
    assert "raw" in capsys.readouterr().err


def test_integrate(three_eq, tmp_path):
    assert run("integrate", three_eq, "--beta", 2, "--t-end", 1, "--h", 0.25, "--out", tmp_path, "--quiet") == 0
    rows = list(csv.reader(open(tmp_path / "trajectory.csv")))
    assert len(rows) == 6


def test_solve_finds_three(three_eq, tmp_path, capsys):
    assert run("solve", three_eq, "--beta", 50, "--m", 16, "--out", tmp_path) == 0
    assert "3 equilibria" in capsys.readouterr().out
    doc = json.loads((tmp_path / "equilibria.json").read_text())
    assert sorted(d["classification"] for d in doc) == ["mixed", "strict-pure", "strict-pure"]


def test_solve_single_start_and_mixed_limit(tmp_path):
    p = tmp_path / "mixed.json"
    dump_tree(trees.unique_mixed_tree(), p)
    assert run("solve", p, "--beta", 1e3, "--v0", "2.5,2.5", "--mixed-limit", "--out", tmp_path, "--quiet") == 0
    ml = json.loads((tmp_path / "mixed_limit.json").read_text())
    assert ml["q"] == pytest.approx(np.sqrt(3) - 1, abs=1e-12)
    (eq,) = json.loads((tmp_path / "equilibria.json").read_text())
    assert abs(eq["v_star"][0] - ml["valuation"]) < 1e-2


def test_mixed_limit_missing_is_input_error(tmp_path):
    p = tmp_path / "pure.json"
    dump_tree(trees.unique_pure_tree(), p)
    assert run("solve", p, "--beta", 5, "--m", 4, "--mixed-limit", "--out", tmp_path, "--quiet") == 2


def test_sweep(tmp_path):
    p = tmp_path / "mixed.json"
    dump_tree(trees.unique_mixed_tree(), p)
    assert run("sweep", p, "--beta-stop", 1e4, "--v0", "2.5,2", "--out", tmp_path, "--quiet") == 0
    (path,) = json.loads((tmp_path / "paths.json").read_text())
    assert path["termination"] == "completed"
    assert np.allclose(path["points"][-1]["v_star"], 2 + 1 / np.sqrt(3), atol=1e-3)


def test_stability_at_a_point(three_eq, tmp_path):
    assert run("stability", three_eq, "--beta", 50, "--v", "1,0", "--out", tmp_path, "--quiet") == 0
    doc = json.loads((tmp_path / "stability.json").read_text())
    assert doc["point"] == [1.0, 0.0] and doc["verdict"] == "stable"


def test_enumerate_with_construction(three_eq, tmp_path):
    assert run("enumerate", three_eq, "--construct", "--out", tmp_path, "--quiet") == 0
    doc = json.loads((tmp_path / "pure_equilibria.json").read_text())
    assert len(doc["pure_equilibria"]) == 2
    assert doc["constructed"]["valuations"] in [d["valuations"] for d in doc["pure_equilibria"]]


def test_z_shift_changes_the_tree(three_eq, tmp_path):
    assert run("enumerate", three_eq, "--z-shift", 3, "--out", tmp_path, "--quiet") == 0
    doc = json.loads((tmp_path / "pure_equilibria.json").read_text())
    assert doc["pure_equilibria"] == []


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "{tree}", "--beta", 1, "--v0", "1,2,3"],
        ["solve", "{tree}", "--beta", 1, "--v0", "a,b"],
        ["sweep", "{tree}", "--beta-start", 10, "--beta-stop", 5],
        ["reduce", "{missing}"],
        ["reduce", "{bad}"],
        ["solve", "{tree}", "--beta", 1, "--threads", 0],
    ],
)
def test_input_errors_exit_2(argv, three_eq, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "classes": ["a"],\n  "states": [,]\n}\n')
    subs = {"{tree}": three_eq, "{missing}": tmp_path / "nope.json", "{bad}": bad}
    assert run(*[subs.get(a, a) for a in argv], "--out", tmp_path) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_malformed_json_names_the_line(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "classes": ["a"],\n  "states": [,]\n}\n')
    run("reduce", bad, "--out", tmp_path)
    assert "line 3" in capsys.readouterr().err


def test_argparse_rejects_negative_beta(three_eq):
    with pytest.raises(SystemExit) as info:
        run("solve", three_eq, "--beta", -1)
    assert info.value.code == 2


def test_no_convergence_exits_4(three_eq, tmp_path, monkeypatch):
    def fail(*a, **k):
        raise SolverError("stuck", np.zeros(2), 1.0)

    monkeypatch.setattr(cli, "find_all", fail)
    assert run("solve", three_eq, "--beta", 5, "--out", tmp_path, "--quiet") == 4


def test_numeric_failure_exits_3(three_eq, tmp_path, monkeypatch):
    from cpal.dynamics import IntegrationError

    def fail(*a, **k):
        raise IntegrationError("blew up")

    monkeypatch.setattr(cli, "integrate", fail)
    assert run("integrate", three_eq, "--beta", 5, "--out", tmp_path, "--quiet") == 3


def test_reproduce_single_check_json(capsys):
    assert run("reproduce", "--only", "1", "--json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] and [c["number"] for c in doc["checks"]] == [1]


def test_reproduce_mutation_fails(capsys, tmp_path):
    assert run("reproduce", "--only", "4", "--mutate", "z2=5", "--save", "--out", tmp_path) == 1
    assert "[FAIL]" in capsys.readouterr().out
    doc = json.loads((tmp_path / "reproduce.json").read_text())
    assert doc["passed"] is False


def test_reproduce_is_deterministic(capsys):
    run("reproduce", "--only", "1,2,4,5", "--json")
    a = capsys.readouterr().out
    run("reproduce", "--only", "1,2,4,5", "--json")
    assert a == capsys.readouterr().out
