"""Brute-force primal minimizer for tiny moment problems.

Deliberately naive: the feasible densities are written as

    q = q0 + A p,   p = (box slack, nullspace coordinates),

the window for ``p`` is the bounding box of the feasible set (clamped to
``|q_i| <= window``), and a uniform grid is searched and repeatedly zoomed
around its best cell.  Only ``gamma*`` is ever evaluated.

Since ``gamma* >= 0``, any grid value ``B`` confines each coordinate of
the minimizer to ``{t : gamma*(t) r_i <= B}``; the window is shrunk to
these intervals before zooming, so the grid is not coarse against the
valley of the objective.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, linprog

from .dual import MomentProblem
from .errors import InfeasibleParameterization
from .measure import entropy_value

__all__ = ["OracleResult", "brute_force_primal"]


class OracleResult(NamedTuple):
    value: float
    q: np.ndarray


def _parameterize(problem: MomentProblem):
    M = problem.theta.theta * problem.ground.weights
    C = problem.target
    K, N = M.shape
    pinv = np.linalg.pinv(M)
    _, _, vt = np.linalg.svd(M)
    null = vt[K:].T  # N x (N - K)
    J = np.nonzero(C.radius > 0)[0]
    q0 = pinv @ C.center
    A = np.hstack([pinv[:, J] * C.radius[J], null])
    return q0, A, len(J)


def _bounding_box(q0, A, n_slack, qlo, qhi):
    d = A.shape[1]
    bounds = [(-1.0, 1.0)] * n_slack + [(None, None)] * (d - n_slack)
    A_ub = np.vstack([A, -A])
    b_ub = np.concatenate([qhi - q0, q0 - qlo])
    box = np.empty((d, 2))
    for j in range(d):
        for side, sign in ((0, 1.0), (1, -1.0)):
            c = np.zeros(d)
            c[j] = sign
            res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
            if res.status == 2:
                raise InfeasibleParameterization("the feasible set is empty")
            if res.status != 0:
                raise RuntimeError(f"window LP failed: {res.message}")
            box[j, side] = res.x[j]
    return box


def _sublevel_bounds(spec, weights, bound, qlo, qhi):
    """Per-point intervals ``{t : gamma*_i(t) r_i <= bound}`` within ``[qlo, qhi]``."""
    lo, hi = qlo.copy(), qhi.copy()
    for i, r in enumerate(weights):
        point = spec.at_point(i)
        m = float(point.m)

        def excess(t):
            return min(float(point.gamma_star(t)) * r - bound, 1e300)

        pad = lambda t: 1e-9 * (1.0 + abs(t))
        if excess(hi[i]) > 0:
            hi[i] = min(brentq(excess, m, hi[i], xtol=1e-12) + pad(hi[i]), qhi[i])
        if excess(lo[i]) > 0:
            lo[i] = max(brentq(excess, lo[i], m, xtol=1e-12) - pad(lo[i]), qlo[i])
    return lo, hi


def _grid(lo, hi, n):
    axes = [np.linspace(a, b, n) if b > a else np.array([a]) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1), axes


def brute_force_primal(problem: MomentProblem, resolution=1e-4, window=1e3,
                       points_per_axis=21) -> OracleResult:
    """Grid-search ``min I(q)`` over ``{q : T q in C}``.

    Zooming stops once the grid spacing is ``resolution / 10`` on every axis.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    if problem.N > 4 or problem.K > 2:
        raise ValueError("brute_force_primal is meant for N <= 4, K <= 2")
    spec, ground = problem.spec, problem.ground
    q0, A, n_slack = _parameterize(problem)
    d = A.shape[1]
    dom = spec.dom_gamma_star
    qlo = np.full(problem.N, max(dom.lo, -window))
    qhi = np.full(problem.N, min(dom.hi, window))

    def value(p):
        q = q0 + p @ A.T
        # round-off from the pseudo-inverse must not push q off a closed end
        slack = 1e-12 * (1.0 + np.abs(q))
        q = np.where((q < qlo) & (q >= qlo - slack), qlo, q)
        q = np.where((q > qhi) & (q <= qhi + slack), qhi, q)
        v = entropy_value(spec, q, ground)
        return np.where(np.isnan(v), np.inf, v), q

    if d == 0:
        v, q = value(np.zeros((1, 0)))
        if not np.isfinite(v[0]):
            raise InfeasibleParameterization("the only feasible density has infinite entropy")
        return OracleResult(float(v[0]), q[0])

    def search_window(qlo, qhi, n):
        full = _bounding_box(q0, A, n_slack, qlo, qhi)
        lo, hi = full[:, 0].copy(), full[:, 1].copy()
        # densify until the grid meets the effective domain
        while True:
            pts, _ = _grid(lo, hi, n)
            vals, qs = value(pts)
            if np.any(np.isfinite(vals)):
                return full, lo, hi, n, pts, vals, qs
            if n ** d > 2_000_000:
                raise InfeasibleParameterization("no grid point has finite entropy")
            n = 2 * n - 1

    n = points_per_axis
    full, lo, hi, n, pts, vals, qs = search_window(qlo, qhi, n)
    for _ in range(2):
        best_val, best = float(np.min(vals)), pts[int(np.argmin(vals))]
        qlo, qhi = _sublevel_bounds(spec, ground.weights, best_val, qlo, qhi)
        full, lo, hi, n, pts, vals, qs = search_window(qlo, qhi, n)
        # keep the incumbent, which lies in the shrunken window by construction
        pts = np.vstack([pts, best])
        vals, qs = value(pts)

    target = resolution / 10.0
    while True:
        k = int(np.argmin(vals))
        best = pts[k]
        spacing = (hi - lo) / (n - 1)
        if np.all(spacing <= target):
            return OracleResult(float(vals[k]), qs[k])
        lo = np.maximum(best - 3 * spacing, full[:, 0])
        hi = np.minimum(best + 3 * spacing, full[:, 1])
        pts, _ = _grid(lo, hi, n)
        pts = np.vstack([pts, best])
        vals, qs = value(pts)
