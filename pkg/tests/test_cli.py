import json

import pytest

from pvesym.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_bracket(capsys):
    code, out = run(capsys, "bracket", "vt", "D")
    assert code == 0 and out["bracket"] == "vt" and out["schema_version"] == 1
    assert run(capsys, "bracket", "vx", "vy")[1]["bracket"] == "0"
    assert run(capsys, "bracket", "vy", "vr")[1]["bracket"] == "-vx"


def test_bracket_parse_error(capsys):
    code, out = run(capsys, "bracket", "vz", "D")
    assert code == 2 and "cannot parse" in out["error"]


def test_adjoint(capsys):
    code, out = run(capsys, "adjoint", "D", "vt", "--eps", "1")
    assert code == 0
    assert out["result"][2] == pytest.approx(2.718281828459045)
    assert out["ode_max_diff"] < 1e-9


def test_classify(capsys):
    code, out = run(capsys, "classify", "--dim", "1", "0,0,0,1,0,2")
    assert code == 0 and out["class_id"] == 6 and out["params"] == {"c": 1}
    assert run(capsys, "classify", "--dim", "1", "0,0,0,0,0,1")[1]["class_id"] == 7
    code, out = run(capsys, "classify", "--dim", "2", "vx", "vr")
    assert code == 2 and "not closed" in out["error"]


def test_reduce(capsys):
    out = run(capsys, "reduce", "--case", "5")[1]
    assert out["p"] == "x - a*t" and out["q"] == "y" and out["v"] == "psi - c*t"
    assert "no reduction can be achieved" in run(capsys, "reduce", "--case", "7")[1]["note"]
    assert "arctan" in run(capsys, "reduce", "--case", "4")[1]["ansatz"]
    bound = run(capsys, "reduce", "--case", "5", "--a", "2", "--F", "3")[1]
    assert bound["p"] == "-2*t + x"


def test_transform(capsys):
    code, out = run(capsys, "transform", "sin(x)*sin(y)", "--F", "1", "--beta", "1")
    assert code == 0
    assert out["result"] == "y + sin(y)*sin(t + x)"
    assert out["output_residual"]["residual_max_abs"] == 0.0


def test_transform_needs_F(capsys):
    code, out = run(capsys, "transform", "x", "--F", "0", "--beta", "1")
    assert code == 2 and "F must be nonzero" in out["error"]


@pytest.mark.parametrize("suite", ["algebra", "reductions", "solutions"])
def test_verify_suites(capsys, suite):
    code, out = run(capsys, "verify", "--suite", suite)
    assert code == 0 and out["passed"] and out["failures"] == []


def test_verify_optimal_system(capsys):
    code, out = run(capsys, "verify", "--suite", "optimal-system", "--trials", "10")
    assert code == 0
    dims = {c["name"]: c["classes_idempotent"] for c in out["reports"][0]["checks"]}
    assert dims == {"optimal-system-dim1": 7, "optimal-system-dim2": 12}


def test_simulate_key_value_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# Rossby wave\nF = 1\nbeta = 1\ndt = 0.001\nt_end = 0.2\nNx = 32\nNy = 32\n"
                   "init = sin(x + t/2)\n")
    out_dir = tmp_path / "out"
    code, out = run(capsys, "simulate", "--config", str(cfg), "--out", str(out_dir))
    assert code == 0
    assert out["max_error_vs_init_expression"] < 1e-6
    assert {"final.csv", "diagnostics.csv", "final.f64", "final.f64.json"} <= set(out["outputs"])


def test_simulate_json_config_deterministic(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"F": 1, "beta": 0.5, "dt": 0.01, "t_end": 0.1, "Nx": 32, "Ny": 32,
                               "init": "random", "seed": 3}))
    run(capsys, "simulate", "--config", str(cfg), "--out", str(tmp_path / "a"))
    run(capsys, "simulate", "--config", str(cfg), "--out", str(tmp_path / "b"))
    for name in ("final.csv", "diagnostics.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate_bad_option(tmp_path, capsys):
    code, out = run(capsys, "simulate", "--set", "gamma=1", "--out", str(tmp_path / "x"))
    assert code == 2 and "gamma" in out["error"]


def test_simulate_singular_operator(tmp_path, capsys):
    code, out = run(capsys, "simulate", "--set", "F=-1", "--set", "Nx=16", "--set", "Ny=16",
                    "--set", "t_end=0.01", "--set", "dt=0.01", "--out", str(tmp_path / "x"))
    assert code == 2 and "singular" in out["error"]
