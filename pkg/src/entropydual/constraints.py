"""Moment and marginal constraint operators, their adjoints and target sets."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateMomentMap, ShapeMismatch
from .measure import GroundSpace

__all__ = [
    "MarginalMap",
    "MomentMap",
    "SupportValue",
    "TargetSet",
    "adjoint",
    "apply_T",
    "gram_matrix",
    "marginal_adjoint",
    "support_inf",
]


@dataclass(frozen=True, eq=False)
class MomentMap:
    """``K`` test functions sampled on the ground points, shape ``(K, N)``."""

    theta: np.ndarray

    def __init__(self, theta):
        th = np.array(theta, dtype=float, ndmin=2)
        if th.ndim != 2:
            raise ShapeMismatch("theta must be a K x N matrix")
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)

    @property
    def K(self) -> int:
        return self.theta.shape[0]

    @property
    def N(self) -> int:
        return self.theta.shape[1]

    @classmethod
    def from_functions(cls, funcs, ground: GroundSpace):
        z = ground.coords
        return cls([np.broadcast_to(np.asarray(f(z), dtype=float), z.shape) for f in funcs])

    def normalization_index(self):
        """Index of a constant-one coordinate, or None."""
        for k, row in enumerate(self.theta):
            if np.all(row == 1.0):
                return k
        return None


class TargetSet:
    """Singleton ``{x0}`` or componentwise box ``[c - r, c + r]`` in R^K."""

    def __init__(self, kind, center, radius=None):
        if kind not in ("singleton", "box"):
            raise ValueError(f"unknown target kind {kind!r}")
        c = np.array(center, dtype=float, ndmin=1)
        r = np.zeros_like(c) if radius is None else np.array(radius, dtype=float, ndmin=1)
        if c.shape != r.shape or c.ndim != 1:
            raise ShapeMismatch("center and radius must be K-vectors")
        if kind == "singleton" and np.any(r != 0):
            raise ValueError("a singleton target has zero radius")
        if np.any(r < 0) or not np.all(np.isfinite(r)) or not np.all(np.isfinite(c)):
            raise ValueError("box radii must be finite and nonnegative")
        c.setflags(write=False)
        r.setflags(write=False)
        self.kind = kind
        self.center = c
        self.radius = r

    @classmethod
    def singleton(cls, x0):
        return cls("singleton", x0)

    @classmethod
    def box(cls, center, radius):
        return cls("box", center, radius)

    @property
    def K(self) -> int:
        return self.center.size

    @property
    def lower(self):
        return self.center - self.radius

    @property
    def upper(self):
        return self.center + self.radius

    def project(self, x):
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, atol=0.0):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def to_dict(self):
        if self.kind == "singleton":
            return {"singleton": self.center.tolist()}
        return {"box": {"center": self.center.tolist(), "radius": self.radius.tolist()}}

    def __eq__(self, other):
        return (isinstance(other, TargetSet) and self.kind == other.kind
                and np.array_equal(self.center, other.center)
                and np.array_equal(self.radius, other.radius))

    def __repr__(self):
        if self.kind == "singleton":
            return f"TargetSet.singleton({self.center.tolist()})"
        return f"TargetSet.box({self.center.tolist()}, {self.radius.tolist()})"


def _check_theta(theta: MomentMap, n):
    if theta.N != n:
        raise ShapeMismatch(f"theta has {theta.N} columns, expected {n}")


def apply_T(theta: MomentMap, q, ground: GroundSpace):
    """Moments ``x_k = sum_i theta_k(z_i) q_i r_i``; batched over leading axes of q."""
    q = np.asarray(q, dtype=float)
    _check_theta(theta, ground.size)
    if q.shape[-1:] != (ground.size,):
        raise ShapeMismatch(f"density of shape {q.shape} for {ground.size} points")
    # pairwise summation over points
    return np.sum(theta.theta * (q * ground.weights)[..., None, :], axis=-1)


def adjoint(theta: MomentMap, y):
    """``u_i = sum_k y_k theta_k(z_i)``; batched over leading axes of y."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1:] != (theta.K,):
        raise ShapeMismatch(f"dual vector of shape {y.shape} for K={theta.K}")
    return np.sum(y[..., :, None] * theta.theta, axis=-2)


class SupportValue(NamedTuple):
    value: float
    witness: np.ndarray
    subgradient: np.ndarray


def support_inf(C: TargetSet, y) -> SupportValue:
    """``inf_{x in C} <y, x>`` with a minimizing ``x`` (sign(0) taken as 0)."""
    y = np.asarray(y, dtype=float)
    if y.shape != (C.K,):
        raise ShapeMismatch(f"dual vector of shape {y.shape} for K={C.K}")
    witness = C.center - C.radius * np.sign(y)
    if C.kind == "singleton":
        value = float(y @ C.center)
    else:
        value = float(y @ C.center - np.sum(C.radius * np.abs(y)))
    return SupportValue(value, witness, witness.copy())


def gram_matrix(theta: MomentMap, ground: GroundSpace, rtol=1e-12):
    """``G = sum_i theta(z_i) theta(z_i)^T r_i``; raises if not positive definite."""
    _check_theta(theta, ground.size)
    G = (theta.theta * ground.weights) @ theta.theta.T
    eig_min = float(np.linalg.eigvalsh(G)[0])
    if eig_min <= rtol * float(np.trace(G)):
        raise DegenerateMomentMap(
            f"Gram matrix is singular (smallest eigenvalue {eig_min:.3e}); "
            "the moment functions are linearly dependent on the ground points")
    return G


@dataclass(frozen=True)
class MarginalMap:
    """Row/column marginal operator on an ``rows x cols`` product grid."""

    rows: int
    cols: int

    @property
    def size(self):
        return self.rows * self.cols

    def apply(self, Q):
        """Marginal masses ``(Q_A, Q_B)`` of a mass matrix (or flat row-major array)."""
        Q = np.asarray(Q, dtype=float)
        if Q.shape[-2:] != (self.rows, self.cols):
            if Q.shape[-1:] != (self.size,):
                raise ShapeMismatch(f"expected {self.rows}x{self.cols} masses")
            Q = Q.reshape(Q.shape[:-1] + (self.rows, self.cols))
        return Q.sum(axis=-1), Q.sum(axis=-2)


def marginal_adjoint(mmap: MarginalMap, f, g):
    """``(f + g)(a, b) = f(a) + g(b)`` flattened row-major."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (mmap.rows,) or g.shape != (mmap.cols,):
        raise ShapeMismatch(
            f"potentials of shapes {f.shape}, {g.shape} for a {mmap.rows}x{mmap.cols} grid")
    return (f[:, None] + g[None, :]).ravel()
