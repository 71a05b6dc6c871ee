import json

import pytest

from daqaoa import __version__
from daqaoa.cli import ExperimentConfig, main
from daqaoa.problems import Graph, Problem, save_problem


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def edge_problem(tmp_path):
    path = tmp_path / "edge.json"
    save_problem(Problem.maxcut(Graph(2, frozenset({(1, 2)}))), path)
    return str(path)


def test_compile_single_edge(capsys, edge_problem):
    code, out = run_cli(capsys, "compile", "--problem", edge_problem, "--gamma", "1.0")
    data = json.loads(out)
    assert code == 0
    assert data["meta"]["version"] == __version__ and data["meta"]["config_hash"]
    assert len([b for b in data["blocks"] if b["duration"] > 0]) == 1
    assert data["verification"]["passed"] and data["verification"]["fidelity"] >= 1 - 1e-9


def test_compile_gamma_zero(capsys, edge_problem):
    code, out = run_cli(capsys, "compile", "--problem", edge_problem, "--gamma", "0")
    assert code == 0 and json.loads(out)["blocks"] == []


def test_compile_n4_rejected(capsys, tmp_path):
    cfg = write(tmp_path / "c.json", {"problem": {"generate": {"n": 4, "p_clause": 1.0}}})
    code, out = run_cli(capsys, "compile", "--config", cfg)
    err = json.loads(out)
    assert code == 2 and err["error"] == "UnsupportedSizeError" and err["exit_code"] == 2


def test_unknown_key_is_validation_error(capsys, tmp_path):
    cfg = write(tmp_path / "c.json", {"problem": {"generate": {"n": 5}}, "colour": "red"})
    code, out = run_cli(capsys, "simulate", "--config", cfg)
    assert code == 2 and "colour" in json.loads(out)["message"]


def test_bound_report(capsys, tmp_path):
    cfg = write(tmp_path / "b.json", {"problem": {"generate": {"n": 6, "seed": 3}}, "alpha": 1000.0,
                                      "gammas": [0.8], "betas": [0.4]})
    code, out = run_cli(capsys, "bound", "--config", cfg)
    rep = json.loads(out)
    assert code == 0 and rep["valid"]
    assert rep["measured_infidelity"] <= rep["sum_delta_sq"]


def test_simulate_modes(capsys, tmp_path):
    base = {"problem": {"generate": {"n": 5, "seed": 1}}, "gammas": [0.7], "betas": [0.3]}
    for mode in ("ideal", "sdaqc"):
        code, out = run_cli(capsys, "simulate", "--config", write(tmp_path / f"{mode}.json", {**base, "mode": mode}))
        assert code == 0 and json.loads(out)["fidelity_vs_ideal"] == pytest.approx(1, abs=1e-9)


def test_optimize_budget_exit(capsys, tmp_path):
    cfg = write(tmp_path / "o.json", {"problem": {"generate": {"n": 5}}, "budget": 10})
    code, out = run_cli(capsys, "optimize", "--config", cfg)
    assert code == 4 and json.loads(out)["budget_exceeded"]


def test_empty_sweep_has_header(capsys, tmp_path):
    cfg = write(tmp_path / "s.json", {"kind": "recovery", "instances": 0})
    code, out = run_cli(capsys, "sweep", "--config", cfg)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 2
    assert lines[0].startswith("# daqaoa ") and "config_hash=" in lines[0]
    assert lines[1].startswith("n,alpha,instance_seed")


def test_reruns_are_byte_identical(tmp_path):
    cfg = write(tmp_path / "t.json", {"ns": [5, 6], "seeds": 3})
    outs = []
    for k in range(2):
        path = tmp_path / f"out{k}.csv"
        assert main(["timecost", "--config", cfg, "--seed", "11", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    other = tmp_path / "other.csv"
    main(["timecost", "--config", cfg, "--seed", "12", "--out", str(other)])
    assert other.read_bytes() != outs[0]


def test_config_hash_tracks_params():
    a = ExperimentConfig("timecost", {"ns": [6], "seed": 1})
    assert a.digest() == ExperimentConfig("timecost", {"seed": 1, "ns": [6]}).digest()
    assert a.digest() != ExperimentConfig("timecost", {"ns": [6], "seed": 2}).digest()
