"""Primal recovery ``q = gamma'(<y, theta>)`` and optimality certificates."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .constraints import TargetSet, adjoint, apply_T
from .dual import DualResult, MomentProblem, Status, dual_objective, solve_dual, _smooth_density
from .errors import NotConverged
from .measure import entropy_value, integrate

__all__ = ["DualCertificate", "certificate", "gamma_star_of", "recover", "solve"]


def recover(problem: MomentProblem, y_hat):
    """Density of the candidate minimizer with respect to the reference weights."""
    _, q = _smooth_density(problem, np.asarray(y_hat, dtype=float))
    return q


def _num(v):
    v = float(v)
    if math.isfinite(v):
        return v
    return "inf" if v > 0 else ("-inf" if v < 0 else "nan")


@dataclass(frozen=True)
class DualCertificate:
    y_hat: np.ndarray
    q_hat: np.ndarray
    x_hat: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    young_residual: float
    feasibility_residual: float
    gamma_star_value: float
    status: str = ""

    SCALARS = ("primal_value", "dual_value", "gap", "young_residual",
               "feasibility_residual", "gamma_star_value")

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, np.ndarray):
                out[f.name] = [_num(a) for a in v]
            elif isinstance(v, str):
                out[f.name] = v
            else:
                out[f.name] = _num(v)
        return out

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def csv_header(cls):
        return ("status",) + cls.SCALARS

    def csv_row(self):
        return (self.status,) + tuple(repr(float(getattr(self, k))) for k in self.SCALARS)


def certificate(problem: MomentProblem, y_hat, status="") -> DualCertificate:
    """Assemble primal/dual values, gap and the Young-identity residual at ``y_hat``."""
    y_hat = np.asarray(y_hat, dtype=float)
    q = recover(problem, y_hat)
    g = problem.ground
    s = adjoint(problem.theta, y_hat)
    primal = float(entropy_value(problem.spec, q, g))
    dual = dual_objective(problem, y_hat)
    gamma_int = float(integrate(problem.spec.gamma(s), g))
    pairing = float(integrate(s * q, g))
    young = abs(primal + gamma_int - pairing)
    x_hat = apply_T(problem.theta, q, g)
    gsv = float(integrate(problem.spec.gamma_star(problem.spec.gamma_prime(s)), g))
    return DualCertificate(
        y_hat=y_hat, q_hat=q, x_hat=x_hat, primal_value=primal, dual_value=dual,
        gap=primal - dual, young_residual=young,
        feasibility_residual=problem.target.distance(x_hat),
        gamma_star_value=gsv, status=str(status))


def solve(problem: MomentProblem):
    """Run the dual solver and certify its output: ``(DualResult, DualCertificate)``."""
    result = solve_dual(problem)
    return result, certificate(problem, result.y_hat, result.status)


def gamma_star_of(problem: MomentProblem, x) -> float:
    """``inf {I(Q) : T Q = x}`` through the dual problem with target ``{x}``.

    Infeasible ``x`` gives ``+inf``.  At the boundary of the feasible moments
    the supremum is finite but not attained; the last dual value is then
    returned.
    """
    res: DualResult = solve_dual(problem.with_target(TargetSet.singleton(x)))
    if res.status is Status.CONVERGED:
        return res.objective
    if res.status is Status.DUAL_UNBOUNDED:
        return res.objective if res.sup_finite else np.inf
    raise NotConverged(f"gamma_star_of: {res.status} ({res.message})")
