"""Feasibility and interior-qualification diagnostics for moment problems.

For densities restricted to a half-line, ``T dom I`` is the cone spanned by
the columns ``theta(z_i) r_i``, and its relative interior is reached by
strictly positive densities.  Both questions reduce to one LP: maximize the
smallest density ``eps`` subject to ``T q in C`` and ``q >= eps``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .dual import MomentProblem

__all__ = ["Verdict", "feasibility_check", "icor_check", "EPS_INTERIOR"]

EPS_INTERIOR = 1e-9
_LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10,
               "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True)
class Verdict:
    verdict: str
    witness: Optional[np.ndarray] = None
    margin: Optional[float] = None

    def __str__(self):
        return self.verdict


def _domain_kind(spec):
    if not spec.closed_form:
        return None
    d = spec.dom_gamma_star
    if np.isneginf(d.lo) and np.isposinf(d.hi):
        return "line"
    if d.lo == 0.0 and np.isposinf(d.hi):
        return "closed_orthant" if d.lo_closed else "open_orthant"
    return None


def _max_min_density(problem: MomentProblem):
    """LP over ``(q, eps)``; returns ``(eps*, q)`` or ``None`` if infeasible."""
    n = problem.N
    M = problem.theta.theta * problem.ground.weights
    C = problem.target
    lo, hi = C.lower, C.upper
    eq = lo == hi
    c = np.zeros(n + 1)
    c[-1] = -1.0
    # q_i - eps >= 0
    A_ub = [np.hstack([-np.eye(n), np.ones((n, 1))])]
    b_ub = [np.zeros(n)]
    if np.any(~eq):
        Mb = M[~eq]
        A_ub += [np.hstack([Mb, np.zeros((Mb.shape[0], 1))]),
                 np.hstack([-Mb, np.zeros((Mb.shape[0], 1))])]
        b_ub += [hi[~eq], -lo[~eq]]
    A_eq = b_eq = None
    if np.any(eq):
        A_eq = np.hstack([M[eq], np.zeros((int(eq.sum()), 1))])
        b_eq = lo[eq]
    bounds = [(0, None)] * n + [(0, 1.0)]
    res = linprog(c, A_ub=np.vstack(A_ub), b_ub=np.concatenate(b_ub), A_eq=A_eq,
                  b_eq=b_eq, bounds=bounds, method="highs", options=_LP_OPTIONS)
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(f"qualification LP failed: {res.message}")
    return float(res.x[-1]), np.asarray(res.x[:-1])


def _least_norm(problem):
    M = problem.theta.theta * problem.ground.weights
    x = problem.target.center
    return M.T @ np.linalg.solve(M @ M.T, x)


def feasibility_check(problem: MomentProblem) -> Verdict:
    """Feasible (with a witness density), Infeasible, or Unknown."""
    kind = _domain_kind(problem.spec)
    if kind is None:
        return Verdict("Unknown")
    if kind == "line":
        return Verdict("Feasible", _least_norm(problem), np.inf)
    out = _max_min_density(problem)
    if out is None:
        return Verdict("Infeasible")
    eps, q = out
    if kind == "open_orthant" and eps <= EPS_INTERIOR:
        return Verdict("Infeasible", None, eps)
    return Verdict("Feasible", np.maximum(q, 0.0), eps)


def icor_check(problem: MomentProblem) -> Verdict:
    """Interior, Boundary, Infeasible, or Unknown for ``C`` against ``icor(T dom I)``."""
    kind = _domain_kind(problem.spec)
    if kind is None:
        return Verdict("Unknown")
    if kind == "line":
        return Verdict("Interior", _least_norm(problem), np.inf)
    out = _max_min_density(problem)
    if out is None:
        return Verdict("Infeasible")
    eps, q = out
    if eps > EPS_INTERIOR:
        return Verdict("Interior", q, eps)
    if kind == "open_orthant":
        return Verdict("Infeasible", None, eps)
    return Verdict("Boundary", np.maximum(q, 0.0), eps)
