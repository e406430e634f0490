"""Dual ascent for moment-constrained entropy minimization.

The dual objective is

    D(y) = inf_{x in C} <y, x> - sum_i gamma(z_i, <y, theta(z_i)>) r_i,

a concave function of the K-vector ``y``.  It is maximized by damped Newton
ascent; the ``l1``-type kinks of box targets are handled orthant-wise (steps
stop at a kink, and a coordinate sitting at zero stays pinned while the
subgradient condition holds there).
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional

import numpy as np

from .constraints import MomentMap, TargetSet, adjoint, apply_T, gram_matrix, support_inf
from .errors import DomainViolation, ShapeMismatch
from .measure import GroundSpace, entropy_value

__all__ = [
    "DualResult",
    "DualTrace",
    "MomentProblem",
    "SolverOptions",
    "Status",
    "dual_gradient",
    "dual_hessian",
    "dual_objective",
    "solve_dual",
]

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    DUAL_UNBOUNDED = "DualUnbounded"
    MAX_ITERATIONS = "MaxIterations"
    STALLED = "Stalled"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolverOptions:
    gap_tol: float = 1e-9
    max_iter: int = 200
    ls_shrink: float = 0.5
    domain_margin: float = 0.99
    init_y: Optional[tuple] = None
    armijo: float = 1e-4
    # relative Newton step below which an iterate counts as settled
    step_tol: float = 1e-6

    def __post_init__(self):
        if not self.gap_tol > 0:
            raise ValueError("gap_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.ls_shrink < 1:
            raise ValueError("ls_shrink must lie in (0, 1)")
        if not 0 < self.domain_margin < 1:
            raise ValueError("domain_margin must lie in (0, 1)")
        if self.init_y is not None:
            object.__setattr__(self, "init_y",
                               tuple(float(v) for v in np.ravel(self.init_y)))


class MomentProblem:
    """``minimize I(Q) subject to sum_i theta(z_i) q_i r_i in C``."""

    def __init__(self, spec, theta, target: TargetSet, ground: GroundSpace,
                 options: SolverOptions = None):
        if not isinstance(theta, MomentMap):
            theta = MomentMap(theta)
        if spec.size is not None and spec.size != ground.size:
            raise ShapeMismatch(
                f"entropy defined on {spec.size} points, ground has {ground.size}")
        if theta.N != ground.size:
            raise ShapeMismatch(
                f"theta has {theta.N} columns, ground has {ground.size} points")
        if target.K != theta.K:
            raise ShapeMismatch(f"target is in R^{target.K}, theta has K={theta.K}")
        self.spec = spec
        self.theta = theta
        self.target = target
        self.ground = ground
        self.options = options or SolverOptions()
        if self.options.init_y is not None and len(self.options.init_y) != theta.K:
            raise ShapeMismatch("init_y must have length K")
        self.gram = gram_matrix(theta, ground)

    @property
    def K(self):
        return self.theta.K

    @property
    def N(self):
        return self.ground.size

    def with_target(self, target: TargetSet) -> "MomentProblem":
        return MomentProblem(self.spec, self.theta, target, self.ground, self.options)

    def with_options(self, **kw) -> "MomentProblem":
        return MomentProblem(self.spec, self.theta, self.target, self.ground,
                             replace(self.options, **kw))

    def __repr__(self):
        return (f"MomentProblem({self.spec.name}, K={self.K}, N={self.N}, "
                f"target={self.target!r})")


def _potentials(problem, y):
    y = np.asarray(y, dtype=float)
    if y.shape != (problem.K,):
        raise ShapeMismatch(f"dual vector of shape {y.shape}, expected ({problem.K},)")
    return adjoint(problem.theta, y)


def _in_domain(problem, s):
    return bool(np.all(problem.spec.dom_gamma.contains(s)))


def dual_objective(problem: MomentProblem, y) -> float:
    s = _potentials(problem, y)
    if not _in_domain(problem, s):
        return -np.inf
    g = problem.spec.gamma(s)
    if not np.all(np.isfinite(g)):
        return -np.inf
    value = support_inf(problem.target, np.asarray(y, dtype=float)).value
    return float(value - np.sum(g * problem.ground.weights))


def _smooth_density(problem, y):
    s = _potentials(problem, y)
    if not _in_domain(problem, s):
        raise DomainViolation(f"<y, theta> leaves the domain of gamma at y={y}")
    q = problem.spec.gamma_prime(s)
    if not np.all(np.isfinite(q)):
        raise DomainViolation(f"gamma' is not finite at y={y}")
    return s, q


def dual_gradient(problem: MomentProblem, y):
    """Supergradient ``witness - T(gamma'(<y, theta>))`` (sign(0) taken as 0)."""
    _, q = _smooth_density(problem, y)
    w = support_inf(problem.target, np.asarray(y, dtype=float)).subgradient
    return w - apply_T(problem.theta, q, problem.ground)


def dual_hessian(problem: MomentProblem, y):
    """Hessian of the smooth part: ``-sum_i theta theta^T gamma''(s_i) r_i``."""
    s, _ = _smooth_density(problem, y)
    h = problem.spec.gamma_second(s)
    if not np.all(np.isfinite(h)):
        raise DomainViolation(f"gamma'' is not finite at y={y}")
    th = problem.theta.theta
    return -(th * (h * problem.ground.weights)) @ th.T


class TraceRecord(NamedTuple):
    iteration: int
    y: np.ndarray
    objective: float
    grad_norm: float
    step: float


@dataclass
class DualTrace:
    records: List[TraceRecord] = field(default_factory=list)

    def append(self, *args):
        self.records.append(TraceRecord(*args))

    @property
    def objectives(self):
        return np.array([r.objective for r in self.records])

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def csv_rows(self):
        yield ("iteration", "objective", "grad_norm", "step")
        for r in self.records:
            yield (r.iteration, repr(r.objective), repr(r.grad_norm), repr(r.step))


@dataclass
class DualResult:
    y_hat: np.ndarray
    trace: DualTrace
    status: Status
    objective: float
    # False when iterates escaped without the objective blowing up
    # (boundary targets: finite supremum, not attained)
    sup_finite: bool = True
    near_boundary: bool = False
    message: str = ""

    @property
    def converged(self):
        return self.status is Status.CONVERGED

    def __iter__(self):
        return iter((self.y_hat, self.trace, self.status))


def _ascent_model(problem, y):
    """Minimal-norm supergradient, free mask and smooth Hessian at ``y``."""
    s, q = _smooth_density(problem, y)
    grad_F = apply_T(problem.theta, q, problem.ground)
    c, r = problem.target.center, problem.target.radius
    kinked = r > 0
    g = c - grad_F - r * np.sign(y)
    free = np.ones(problem.K, dtype=bool)
    at_kink = kinked & (y == 0)
    for k in np.nonzero(at_kink)[0]:
        up = c[k] - r[k] - grad_F[k]
        down = c[k] + r[k] - grad_F[k]
        if up > 0:
            g[k] = up
        elif down < 0:
            g[k] = down
        else:
            g[k] = 0.0
            free[k] = False
    h = problem.spec.gamma_second(s)
    th = problem.theta.theta
    hess_F = (th * (h * problem.ground.weights)) @ th.T
    return s, q, g, free, hess_F


def _newton_direction(g, free, hess_F, y):
    d = np.zeros_like(g)
    idx = np.nonzero(free)[0]
    if idx.size == 0:
        return d, False
    newton = False
    gf = g[idx]
    Hf = hess_F[np.ix_(idx, idx)]
    if np.all(np.isfinite(Hf)):
        try:
            L = np.linalg.cholesky(Hf)
            df = np.linalg.solve(L.T, np.linalg.solve(L, gf))
            newton = bool(np.all(np.isfinite(df)))
        except np.linalg.LinAlgError:
            newton = False
    if not newton:
        df = gf
    d[idx] = df
    # stay in the orthant chosen at kinks
    d[(y == 0) & (d * g < 0)] = 0.0
    if not (g @ d > 0):
        d = np.where(free, g, 0.0)
        newton = False
    return d, newton


def _curvature_collapsed(hess_F, free, rtol=1e-12):
    idx = np.nonzero(free)[0]
    if idx.size == 0:
        return False
    Hf = hess_F[np.ix_(idx, idx)]
    if not np.all(np.isfinite(Hf)):
        return False
    ev = np.linalg.eigvalsh(Hf)
    return bool(ev[0] <= rtol * max(ev[-1], 0.0))


def _max_step(problem, y, d):
    t_max = np.inf
    kinked = problem.target.radius > 0
    cross = kinked & (y != 0) & (y * d < 0)
    t_kink = np.inf
    hits = np.zeros_like(cross)
    if np.any(cross):
        ratios = np.full(y.shape, np.inf)
        ratios[cross] = -y[cross] / d[cross]
        t_kink = float(np.min(ratios))
        hits = ratios <= t_kink * (1 + 1e-12)
    dom = problem.spec.dom_gamma
    s = adjoint(problem.theta, y)
    ds = adjoint(problem.theta, d)
    with np.errstate(divide="ignore", invalid="ignore"):
        if np.isfinite(dom.hi):
            up = ds > 0
            if np.any(up):
                t_max = min(t_max, float(np.min((dom.hi - s[up]) / ds[up])))
        if np.isfinite(dom.lo):
            down = ds < 0
            if np.any(down):
                t_max = min(t_max, float(np.min((dom.lo - s[down]) / ds[down])))
    return t_kink, hits, t_max


def _certificate_numbers(problem, y, f, q):
    primal = float(entropy_value(problem.spec, q, problem.ground))
    x_q = apply_T(problem.theta, q, problem.ground)
    feas = problem.target.distance(x_q)
    return primal - f, feas


_ROUNDING = 64 * np.finfo(float).eps


def solve_dual(problem: MomentProblem) -> DualResult:
    """Maximize the dual objective; see the module docstring.

    Converged requires a duality gap and a feasibility residual of the
    recovered density both below ``gap_tol`` and a settled Newton step.
    DualUnbounded is reported when the objective or the iterates exceed
    ``1 / gap_tol``, or when the gap closes while the Newton step does not
    shrink (supremum approached only at infinity).
    """
    opt = problem.options
    tol = opt.gap_tol
    y = np.zeros(problem.K) if opt.init_y is None else np.array(opt.init_y, dtype=float)
    f = dual_objective(problem, y)
    if not np.isfinite(f):
        raise DomainViolation(f"initial dual point {y} is outside the dual domain")
    trace = DualTrace()
    escaping = 0
    step = 0.0
    prev_feas = np.inf
    dom = problem.spec.dom_gamma

    def finish(status, msg, sup_finite=True):
        s = adjoint(problem.theta, y)
        near = False
        for end in (dom.lo, dom.hi):
            if np.isfinite(end) and np.any(np.abs(s - end) <= 1e-6):
                near = True
        log.debug("solve_dual: %s after %d iterations (%s)", status, it, msg)
        return DualResult(y.copy(), trace, status, f, sup_finite, near, msg)

    for it in range(opt.max_iter + 1):
        s, q, g, free, hess_F = _ascent_model(problem, y)
        gnorm = float(np.linalg.norm(g))
        trace.append(it, y.copy(), f, gnorm, step)

        gap, feas = _certificate_numbers(problem, y, f, q)
        cert_ok = abs(gap) <= tol and feas <= tol
        d, _ = _newton_direction(g, free, hess_F, y)
        dnorm = float(np.linalg.norm(d))
        settled = dnorm <= opt.step_tol * (1.0 + float(np.linalg.norm(y))) or gnorm == 0.0
        # one more Newton step is cheap and keeps the infeasibility of q
        # from pushing the gap below zero
        polished = feas <= 1e-2 * tol or feas >= 0.5 * prev_feas
        if cert_ok and settled and polished:
            return finish(Status.CONVERGED, f"gap {gap:.3e}, residual {feas:.3e}")
        prev_feas = feas
        # a closed gap with unsettled steps, or curvature collapsing along a
        # long Newton step, means the supremum is only approached at infinity
        if (cert_ok and not settled) or (_curvature_collapsed(hess_F, free) and dnorm > 1.0):
            escaping += 1
            if escaping >= 3:
                return finish(Status.DUAL_UNBOUNDED,
                              "iterates escape along a recession direction: "
                              "dual optimum not attained", sup_finite=cert_ok)
        else:
            escaping = 0
        if it == opt.max_iter:
            break

        t_kink, hits, t_dom = _max_step(problem, y, d)
        t = min(1.0, opt.domain_margin * t_dom, t_kink)
        slope = float(g @ d)
        accepted = False
        for _ in range(80):
            y_new = y + t * d
            if t == t_kink:
                y_new[hits] = 0.0
            f_new = dual_objective(problem, y_new)
            if not np.isfinite(f_new):
                t *= opt.ls_shrink
                continue
            if f_new >= f and f_new >= f + opt.armijo * t * slope:
                accepted = True
                break
            # near the optimum the objective change drowns in rounding, so
            # fall back on a decrease of the gradient norm
            if f_new >= f - _ROUNDING * (1.0 + abs(f)):
                _, _, g_new, _, _ = _ascent_model(problem, y_new)
                if np.linalg.norm(g_new) < gnorm:
                    accepted = True
                    break
            t *= opt.ls_shrink
        if not accepted:
            if cert_ok:
                return finish(Status.CONVERGED,
                              f"line search exhausted at gap {gap:.3e}, residual {feas:.3e}")
            return finish(Status.STALLED, "line search failed to increase the objective")
        step = t * float(np.linalg.norm(d))
        y, f = y_new, f_new

        if f > 1.0 / tol and gnorm > tol:
            return finish(Status.DUAL_UNBOUNDED,
                          f"dual objective exceeded {1.0 / tol:.3g}", sup_finite=False)
        if np.linalg.norm(y) > 1.0 / tol:
            _, q_new = _smooth_density(problem, y)
            gap_n, feas_n = _certificate_numbers(problem, y, f, q_new)
            finite = abs(gap_n) <= tol and feas_n <= tol
            return finish(Status.DUAL_UNBOUNDED,
                          f"dual iterates exceeded norm {1.0 / tol:.3g}", sup_finite=finite)

    return finish(Status.MAX_ITERATIONS, f"no certificate after {opt.max_iter} iterations")
