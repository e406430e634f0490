"""Finite weighted ground spaces, integration, entropy values and Orlicz norms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NotAYoungFunction

__all__ = [
    "GroundSpace",
    "HolderReport",
    "entropy_value",
    "holder_check",
    "integrate",
    "luxemburg_norm",
]


@dataclass(frozen=True, eq=False)
class GroundSpace:
    """Points ``z_i`` carrying strictly positive reference masses ``r_i``."""

    points: np.ndarray
    weights: np.ndarray

    def __init__(self, points, weights):
        pts = np.asarray(points)
        if pts.dtype.kind not in "biuf":
            pts = np.asarray(points, dtype=object)
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if len(pts) != w.size:
            raise LengthMismatch(f"{len(pts)} points but {w.size} weights")
        if not np.all(np.isfinite(w)) or not np.all(w > 0):
            raise ValueError("reference weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def coords(self) -> np.ndarray:
        """Points as floats; only meaningful for numeric ground spaces."""
        return np.asarray(self.points, dtype=float)

    @classmethod
    def uniform(cls, points, total_mass=None):
        points = np.asarray(points)
        n = len(points)
        mass = float(n) if total_mass is None else float(total_mass)
        return cls(points, np.full(n, mass / n))

    def __repr__(self):
        return f"GroundSpace(size={self.size}, mass={self.weights.sum():.6g})"


def _check_len(u, ground):
    u = np.asarray(u, dtype=float)
    if u.shape[-1:] != (ground.size,):
        raise LengthMismatch(
            f"expected last axis of length {ground.size}, got shape {u.shape}")
    return u


def integrate(u, ground: GroundSpace):
    """``sum_i u_i r_i`` (batched over leading axes)."""
    u = _check_len(u, ground)
    return np.sum(u * ground.weights, axis=-1)


def entropy_value(spec, q, ground: GroundSpace):
    """``I(Q) = sum_i gamma*(z_i, q_i) r_i``; ``+inf`` outside the domain.

    ``q`` may carry leading batch axes.
    """
    q = _check_len(q, ground)
    vals = spec.gamma_star(q)
    with np.errstate(invalid="ignore"):
        total = np.sum(vals * ground.weights, axis=-1)
    return np.where(np.any(np.isposinf(vals), axis=-1), np.inf, total)


def _check_young(rho, u, ground):
    zero = np.asarray(rho(np.zeros(ground.size)), dtype=float)
    if not np.allclose(zero, 0.0, atol=1e-14):
        raise NotAYoungFunction(f"rho(0) = {zero} is not zero")
    probe = np.outer([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0], np.where(u == 0, 1.0, u))
    vals = np.asarray(rho(probe), dtype=float)
    if np.any(vals < -1e-14) or np.any(np.isnan(vals)):
        raise NotAYoungFunction("rho takes negative or undefined values")


def luxemburg_norm(u, rho, ground: GroundSpace, tol=1e-12, check=True):
    """``inf {beta > 0 : sum_i rho(z_i, u_i / beta) r_i <= 1}`` by bisection.

    The returned value is the upper end of the final bracket, so the unit
    ball condition holds exactly at it.
    """
    u = _check_len(u, ground)
    if check:
        _check_young(rho, u, ground)
    if not np.any(u):
        return 0.0

    def level(beta):
        with np.errstate(all="ignore"):
            vals = np.asarray(rho(u / beta), dtype=float)
        if np.any(np.isposinf(vals)):
            return np.inf
        return float(np.sum(vals * ground.weights))

    hi = 1.0
    while level(hi) > 1.0:
        hi *= 2.0
        if not np.isfinite(hi):
            raise OverflowError("Luxemburg norm exceeds the float range")
    lo = hi / 2.0
    while level(lo) <= 1.0:
        hi = lo
        lo /= 2.0
        if lo < 1e-300:
            return hi
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if level(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class HolderReport:
    lhs: float
    rhs: float
    norm_u: float
    norm_v: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12) + 1e-300


def holder_check(u, v, family, ground: GroundSpace, rho=None, rho_star=None):
    """Compare ``|sum u v r|`` with ``2 ||u||_rho ||v||_rho*``.

    Defaults to ``rho = lambda_max`` of ``family`` and its conjugate.
    """
    rho = family.lambda_max if rho is None else rho
    rho_star = family.lambda_max_star if rho_star is None else rho_star
    u = _check_len(u, ground)
    v = _check_len(v, ground)
    lhs = abs(float(integrate(u * v, ground)))
    nu = luxemburg_norm(u, rho, ground)
    nv = luxemburg_norm(v, rho_star, ground, tol=1e-10)
    return HolderReport(lhs, 2.0 * nu * nv, nu, nv)
