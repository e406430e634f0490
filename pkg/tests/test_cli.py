import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from entropydual import GroundSpace, catalog, luxemburg_norm, young_family
from entropydual.cli import EXIT, parse_problem, problem_to_dict, run

DEMO = Path(__file__).resolve().parents[1] / "demos" / "problems"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def report(*argv):
    code, out, _ = call(*argv)
    return code, json.loads(out)


def write_json(tmp_path, d, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return path


def test_solve_quadratic():
    code, r = report("solve", DEMO / "quadratic_3pt.json")
    assert code == EXIT["ok"]
    assert r["status"] == "Converged"
    np.testing.assert_allclose(r["y_hat"], [0.25], atol=1e-12)
    np.testing.assert_allclose(r["primal_value"], 0.0625, atol=1e-12)


def test_solve_boltzmann_value():
    code, r = report("solve", DEMO / "boltzmann_2pt.json")
    assert code == 0
    np.testing.assert_allclose(r["primal_value"], 0.3 * math.log(0.3) + 0.7 * math.log(0.7) + 1,
                               atol=1e-10)


def test_solve_infeasible_and_boundary():
    code, r = report("solve", DEMO / "infeasible_mean2.json")
    assert code == EXIT["infeasible"]
    assert r["status"] == "DualUnbounded" and r["sup_finite"] is False
    code, out, err = call("solve", "--qualify", DEMO / "boundary_mean1.json")
    assert code == EXIT["infeasible"]
    assert "icor: Boundary" in err and "feasibility: Feasible" in err
    r = json.loads(out)
    assert r["qualification"]["icor"] == "Boundary"
    assert r["sup_finite"] is True


def test_qualify_infeasible_forces_exit_code():
    code, out, err = call("solve", "--qualify", DEMO / "infeasible_mean2.json")
    assert code == EXIT["infeasible"]
    assert "feasibility: Infeasible" in err


def test_max_iterations_exit(tmp_path):
    z = np.linspace(-5, 5, 201)
    d = {"entropy": {"name": "boltzmann_special"},
         "ground": {"points": z.tolist(), "weights": [0.05] * 201},
         "theta": [[1.0] * 201, z.tolist(), (z * z).tolist()],
         "target": {"singleton": [1, 0, 1]}}
    path = write_json(tmp_path, d)
    code, r = report("solve", "--max-iter", 1, path)
    assert code == EXIT["unfinished"]
    assert r["status"] == "MaxIterations"
    assert report("solve", path)[0] == 0


def test_trace_and_density(tmp_path):
    trace, density = tmp_path / "t.csv", tmp_path / "d.csv"
    code, _, _ = call("solve", "--trace", trace, "--density", density, DEMO / "quadratic_3pt.json")
    assert code == 0
    rows = list(csv.reader(density.open()))
    assert rows[0] == ["point", "weight", "q_hat"]
    np.testing.assert_allclose([float(r[2]) for r in rows[1:]], [-0.25, 0, 0.25], atol=1e-12)
    t = list(csv.reader(trace.open()))
    assert t[0] == ["iteration", "objective", "grad_norm", "step"] and len(t) >= 2


def test_oracle_flag():
    code, r = report("solve", "--oracle", DEMO / "boltzmann_2pt.json")
    assert code == 0
    assert abs(r["oracle"]["difference"]) <= 1e-3
    code, r = report("solve", "--oracle", DEMO / "infeasible_mean2.json")
    assert code == EXIT["infeasible"]
    assert r["oracle"]["value"] == "inf"


def test_dump_normalized_round_trip():
    for name in ("quadratic_3pt", "variant_box", "boltzmann_2pt"):
        code, d = report("solve", "--dump-normalized", DEMO / f"{name}.json")
        assert code == 0
        assert problem_to_dict(parse_problem(d)) == d


def test_cli_overrides_options():
    code, d = report("solve", DEMO / "quadratic_3pt.json", "--dump-normalized",
                     "--gap-tol", "1e-6", "--init-y", "0.1")
    assert d["options"]["gap_tol"] == 1e-6
    assert d["options"]["init_y"] == [0.1]


@pytest.mark.parametrize("bad", [
    {"entropy": {"name": "nope"}},
    {"entropy": {"name": "quadratic"}, "ground": {"points": [0, 1], "weights": [1, 1]},
     "theta": [[1, 1]], "target": {"singleton": [1]}, "options": {"speed": 3}},
    {"entropy": {"name": "quadratic"}, "ground": {"points": [0, 1], "weights": [1, -1]},
     "theta": [[1, 1]], "target": {"singleton": [1]}},
    {"entropy": {"name": "quadratic"}, "ground": {"points": [0, 1], "weights": [1, 1]},
     "theta": [[1, 1, 1]], "target": {"singleton": [1]}},
    [1, 2, 3],
])
def test_bad_input_exits_one(tmp_path, bad):
    code, out, err = call("solve", write_json(tmp_path, bad))
    assert code == EXIT["input"]
    assert err.startswith("error:")


def test_missing_and_malformed_files(tmp_path):
    assert call("solve", tmp_path / "absent.json")[0] == EXIT["input"]
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert call("solve", path)[0] == EXIT["input"]


def test_marginals():
    code, r = report("marginals", DEMO / "ipf_2x2.json")
    assert code == 0
    np.testing.assert_allclose(r["coupling"], [[0.35, 0.35], [0.15, 0.15]], rtol=1e-14)
    code, r = report("marginals", DEMO / "ipf_csv.json")
    assert code == 0 and r["status"] == "Converged"
    Q = np.array(r["coupling"])
    np.testing.assert_allclose(Q.sum(axis=1), [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(Q.sum(axis=0), [0.3, 0.7], atol=1e-12)
    assert abs(r["gap"]) <= 1e-10


def test_marginals_failures(tmp_path):
    zero = write_json(tmp_path, {"kernel": [[0, 1], [1, 0]], "row_target": [1, 0],
                                 "col_target": [1, 0]})
    code, r = report("marginals", zero)
    assert code == EXIT["infeasible"] and r["status"] == "Infeasible"
    slow = write_json(tmp_path, {"kernel": [[1, 0.2], [0.3, 1]], "row_target": [0.7, 0.3],
                                 "col_target": [0.2, 0.8]}, "slow.json")
    code, r = report("marginals", "--max-sweeps", 1, "--tol", 1e-14, slow)
    assert code == EXIT["unfinished"] and r["status"] == "MaxIterations"


def test_gamma_star():
    code, r = report("gamma-star", DEMO / "boltzmann_2pt.json", "--x", 1, 0.7)
    assert code == 0
    np.testing.assert_allclose(r["gamma_star"], 0.3 * math.log(0.3) + 0.7 * math.log(0.7) + 1,
                               atol=1e-9)
    code, r = report("gamma-star", DEMO / "boltzmann_2pt.json", "--x", 1, 2)
    assert code == EXIT["infeasible"] and r["gamma_star"] == "inf"
    assert call("gamma-star", DEMO / "boltzmann_2pt.json", "--x", 1)[0] == EXIT["input"]


def test_norm():
    code, r = report("norm", DEMO / "norms.json")
    assert code == 0
    g = GroundSpace([0, 1, 2], [0.25, 0.25, 0.5])
    rho = young_family(catalog("boltzmann_special", g)).lambda_max
    for u, n in zip([[1, -2, 0.5], [0, 0, 3]], r["norms"]):
        np.testing.assert_allclose(n, luxemburg_norm(np.array(u, float), rho, g), rtol=1e-12)
    code, r = report("norm", "--rho", "lambda_plus", DEMO / "norms.json")
    assert r["rho"] == "lambda_plus"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "entropydual", "solve",
                           str(DEMO / "quadratic_3pt.json")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "Converged"
