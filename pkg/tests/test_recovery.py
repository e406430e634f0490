import json
import math

import numpy as np
import pytest

from entropydual import (
    CATALOG, DomainViolation, DualCertificate, NotConverged, SolverOptions, Status, apply_T,
    certificate, gamma_star_of, recover, solve,
)
from instances import desk_suite, quadratic_3pt, two_point


def test_recover_examples():
    np.testing.assert_allclose(recover(quadratic_3pt(), [0.25]), [-0.25, 0, 0.25])
    b = two_point("boltzmann_special", [1, 0.7])
    np.testing.assert_allclose(recover(b, [math.log(0.3), math.log(7 / 3)]), [0.3, 0.7],
                               rtol=1e-15)


@pytest.mark.parametrize("label,problem", desk_suite()[::2], ids=lambda v: v if isinstance(v, str) else "")
def test_recover_at_zero_is_m(label, problem):
    np.testing.assert_array_equal(recover(problem, np.zeros(problem.K)),
                                  np.broadcast_to(problem.spec.m, (problem.N,)))


def test_certificate_quadratic():
    c = certificate(quadratic_3pt(), [0.25])
    assert abs(c.gap) <= 1e-12
    assert c.young_residual <= 1e-12
    np.testing.assert_allclose(c.primal_value, 0.0625, rtol=1e-14)
    np.testing.assert_allclose(c.gamma_star_value, c.primal_value, rtol=1e-14)


def test_certificate_boltzmann():
    p = two_point("boltzmann_special", [1, 0.7])
    c = certificate(p, [math.log(0.3), math.log(7 / 3)])
    np.testing.assert_allclose(c.primal_value, 0.3 * math.log(0.3) + 0.7 * math.log(0.7) + 1,
                               rtol=1e-14)
    assert c.feasibility_residual <= 1e-9


def test_certificate_detects_perturbation():
    c = certificate(quadratic_3pt(), [0.35])
    assert c.gap > 1e-4


@pytest.mark.parametrize("label,problem", desk_suite(), ids=lambda v: v if isinstance(v, str) else "")
def test_certificate_invariants(label, problem):
    res, c = solve(problem)
    assert res.status is Status.CONVERGED
    assert abs(c.gap) <= problem.options.gap_tol
    assert c.gap >= -1e-10
    assert c.feasibility_residual >= 0
    assert c.young_residual <= 1e-8 * (1 + abs(c.primal_value))
    np.testing.assert_allclose(c.gamma_star_value, c.primal_value, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(c.x_hat, apply_T(problem.theta, c.q_hat, problem.ground))


@pytest.mark.parametrize("label,problem", desk_suite()[::3], ids=lambda v: v if isinstance(v, str) else "")
def test_uniqueness_across_starts(label, problem):
    rng = np.random.default_rng(2)
    _, c0 = solve(problem)
    for _ in range(3):
        y0 = rng.normal(scale=0.3, size=problem.K)
        if problem.spec.dom_gamma.hi < np.inf:
            y0 = np.minimum(y0, 0.2)
        _, c1 = solve(problem.with_options(init_y=tuple(y0)))
        assert c1.status == "Converged"
        assert np.max(np.abs(c1.q_hat - c0.q_hat)) <= 1e-6


@pytest.mark.parametrize("name", CATALOG)
def test_box_optimum_minimizes_gamma_star(name):
    label, p = next(item for item in desk_suite() if item[0] == f"{name}/four/box")
    _, c = solve(p)
    base = gamma_star_of(p, c.x_hat)
    np.testing.assert_allclose(base, c.primal_value, atol=1e-8)
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = rng.uniform(p.target.lower, p.target.upper)
        assert base <= gamma_star_of(p, x) + 1e-6


def test_gamma_star_of_examples():
    p = two_point("boltzmann_special", [1, 0.7])
    # mR has moments (2, 1)
    assert abs(gamma_star_of(p, [2.0, 1.0])) <= 1e-12
    np.testing.assert_allclose(gamma_star_of(quadratic_3pt(), [0.5]), 0.0625, rtol=1e-12)
    assert gamma_star_of(p, [1.0, 2.0]) == np.inf
    # boundary moment: finite value, not attained by the dual
    np.testing.assert_allclose(gamma_star_of(p, [1.0, 1.0]), 1.0, atol=1e-8)


def test_gamma_star_of_not_converged():
    p = two_point("boltzmann_special", [1, 0.7], SolverOptions(max_iter=1))
    with pytest.raises(NotConverged):
        gamma_star_of(p, [1.0, 0.4])


def test_certificate_serialization():
    _, c = solve(two_point("boltzmann_special", [1, 0.7]))
    d = json.loads(c.to_json())
    assert list(d) == ["y_hat", "q_hat", "x_hat", "primal_value", "dual_value", "gap",
                       "young_residual", "feasibility_residual", "gamma_star_value", "status"]
    assert d["status"] == "Converged"
    assert d["primal_value"] == c.primal_value
    row = c.csv_row()
    assert len(row) == len(DualCertificate.csv_header())
    assert float(row[1]) == c.primal_value
    _, bad = solve(two_point("boltzmann_special", [1, 2]))
    assert json.loads(bad.to_json())["status"] == "DualUnbounded"


def test_recover_outside_domain():
    p = two_point("reverse_relative", [1, 0.7])
    with pytest.raises(DomainViolation):
        recover(p, [0.0, 1.0])


def test_certificate_non_finite_values_serialize():
    c = DualCertificate(np.zeros(1), np.zeros(2), np.zeros(1), np.inf, -np.inf, np.inf,
                        np.nan, 0.0, np.inf, "DualUnbounded")
    d = c.to_dict()
    assert (d["primal_value"], d["dual_value"], d["young_residual"]) == ("inf", "-inf", "nan")
    json.dumps(d, allow_nan=False)
