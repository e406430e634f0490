"""Iterative proportional fitting for prescribed marginals.

With the integrand ``t log t - t + 1`` and the marginal operator, the dual
potentials are a pair ``(f, g)`` on rows and columns and the optimal
coupling is ``Q(a, b) = exp(f(a) + g(b)) R(a, b)``.  Alternately solving the
row and column blocks of the dual in closed form is IPF; potentials are kept
in multiplicative form ``u = exp(f)``, ``v = exp(g)``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import special

from .constraints import MarginalMap, TargetSet
from .dual import MomentProblem
from .errors import NotConverged, ShapeMismatch, ZeroDenominator
from .measure import GroundSpace
from .recovery import DualCertificate
from .young import catalog

__all__ = [
    "MarginalProblem",
    "MarginalSolution",
    "ScalingPair",
    "as_moment_problem",
    "ipf_step",
    "marginal_dual_objective",
    "marginals_certificate",
    "solve_marginals",
    "update_cols",
    "update_rows",
]


class MarginalProblem:
    def __init__(self, kernel, row_target, col_target):
        R = np.array(kernel, dtype=float, ndmin=2)
        a = np.array(row_target, dtype=float, ndmin=1)
        b = np.array(col_target, dtype=float, ndmin=1)
        if R.ndim != 2 or a.shape != (R.shape[0],) or b.shape != (R.shape[1],):
            raise ShapeMismatch(
                f"kernel {R.shape} does not match targets {a.shape}, {b.shape}")
        if np.any(R < 0) or not np.all(np.isfinite(R)):
            raise ValueError("kernel entries must be finite and nonnegative")
        if np.any(a < 0) or np.any(b < 0):
            raise ValueError("marginal targets must be nonnegative")
        if abs(a.sum() - b.sum()) > 1e-12 * max(1.0, a.sum()):
            raise ValueError(
                f"row and column targets carry different mass ({a.sum()} vs {b.sum()})")
        for arr in (R, a, b):
            arr.setflags(write=False)
        self.kernel = R
        self.row_target = a
        self.col_target = b
        self.map = MarginalMap(*R.shape)

    @property
    def shape(self):
        return self.kernel.shape


class ScalingPair(NamedTuple):
    u: np.ndarray
    v: np.ndarray

    @classmethod
    def ones(cls, problem):
        return cls(np.ones(problem.shape[0]), np.ones(problem.shape[1]))

    def potentials(self):
        """``(f, g) = (log u, log v)`` with the gauge ``sum(f) = 0``."""
        with np.errstate(divide="ignore"):
            f, g = np.log(self.u), np.log(self.v)
        c = f.mean() if np.all(np.isfinite(f)) else 0.0
        return f - c, g + c

    def coupling(self, kernel):
        return self.u[:, None] * kernel * self.v[None, :]


class MarginalSolution(NamedTuple):
    Q: np.ndarray
    scaling: ScalingPair
    sweeps: int


def update_rows(problem: MarginalProblem, v):
    denom = problem.kernel @ v
    bad = (denom <= 0) & (problem.row_target > 0)
    if np.any(bad):
        raise ZeroDenominator(f"rows {np.nonzero(bad)[0].tolist()} have positive "
                              "target but no reachable kernel mass")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(problem.row_target > 0, problem.row_target / denom, 0.0)


def update_cols(problem: MarginalProblem, u):
    denom = u @ problem.kernel
    bad = (denom <= 0) & (problem.col_target > 0)
    if np.any(bad):
        raise ZeroDenominator(f"columns {np.nonzero(bad)[0].tolist()} have positive "
                              "target but no reachable kernel mass")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(problem.col_target > 0, problem.col_target / denom, 0.0)


def ipf_step(problem: MarginalProblem, scaling: ScalingPair) -> ScalingPair:
    """One sweep: fit rows, then columns."""
    u = update_rows(problem, scaling.v)
    v = update_cols(problem, u)
    return ScalingPair(u, v)


def _marginal_error(problem, Q):
    rows, cols = problem.map.apply(Q)
    return max(np.abs(rows - problem.row_target).sum(),
               np.abs(cols - problem.col_target).sum())


def solve_marginals(problem: MarginalProblem, tol=1e-12, max_sweeps=1000,
                    scaling: ScalingPair = None) -> MarginalSolution:
    """IPF until the l1 marginal error is at most ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    scaling = ScalingPair.ones(problem) if scaling is None else scaling
    Q = scaling.coupling(problem.kernel)
    if _marginal_error(problem, Q) <= tol:
        return MarginalSolution(Q, scaling, 0)
    for sweep in range(1, max_sweeps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            scaling = ipf_step(problem, scaling)
            Q = scaling.coupling(problem.kernel)
        if not (np.all(np.isfinite(scaling.u)) and np.all(np.isfinite(scaling.v))):
            raise NotConverged(
                f"scalings overflowed after {sweep} sweeps: the targets are not "
                "reachable on the support of the kernel")
        if _marginal_error(problem, Q) <= tol:
            return MarginalSolution(Q, scaling, sweep)
    raise NotConverged(
        f"marginal error {_marginal_error(problem, Q):.3e} after {max_sweeps} sweeps")


def marginal_dual_objective(problem: MarginalProblem, scaling: ScalingPair) -> float:
    """``<f, row> + <g, col> - sum (exp(f + g) - 1) R`` at ``f = log u, g = log v``."""
    u, v = scaling
    lin = np.sum(special.xlogy(problem.row_target, u)) + np.sum(
        special.xlogy(problem.col_target, v))
    return float(lin - np.sum(scaling.coupling(problem.kernel) - problem.kernel))


def marginals_certificate(problem: MarginalProblem, scaling: ScalingPair) -> DualCertificate:
    u, v = scaling
    if not (np.all(u > 0) and np.all(v > 0)):
        raise ValueError("certificate needs strictly positive scalings")
    R = problem.kernel
    f, g = scaling.potentials()
    pot = f[:, None] + g[None, :]
    dens = np.exp(pot)
    mask = R > 0
    # gamma*(t) = t log t - t + 1 at t = dens, gamma(s) = e^s - 1
    gstar = special.xlogy(dens, dens) - dens + 1.0
    primal = float(np.sum(gstar[mask] * R[mask]))
    gamma_int = float(np.sum(np.expm1(pot)[mask] * R[mask]))
    pairing = float(np.sum((pot * dens)[mask] * R[mask]))
    dual = float(f @ problem.row_target + g @ problem.col_target - gamma_int)
    Q = dens * R
    rows, cols = problem.map.apply(Q)
    x_hat = np.concatenate([rows, cols])
    target = np.concatenate([problem.row_target, problem.col_target])
    return DualCertificate(
        y_hat=np.concatenate([f, g]), q_hat=dens.ravel(), x_hat=x_hat,
        primal_value=primal, dual_value=dual, gap=primal - dual,
        young_residual=abs(primal + gamma_int - pairing),
        feasibility_residual=float(np.linalg.norm(x_hat - target)),
        gamma_star_value=primal)


def as_moment_problem(problem: MarginalProblem, options=None):
    """Equivalent moment problem on the support of the kernel.

    Coordinates are the row indicators and all column indicators but the
    last (the dropped one is implied by the total mass).  Returns the
    problem and the flat row-major indices of the kept cells.
    """
    A, B = problem.shape
    cells = np.flatnonzero(problem.kernel.ravel() > 0)
    rows, cols = np.divmod(cells, B)
    ground = GroundSpace(cells, problem.kernel.ravel()[cells])
    theta = np.vstack([
        (rows[None, :] == np.arange(A)[:, None]).astype(float),
        (cols[None, :] == np.arange(B - 1)[:, None]).astype(float),
    ])
    target = TargetSet.singleton(np.concatenate([problem.row_target, problem.col_target[:-1]]))
    spec = catalog("boltzmann_special", ground)
    return MomentProblem(spec, theta, target, ground, options), cells
