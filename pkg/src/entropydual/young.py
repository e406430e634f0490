"""Entropy integrands, their conjugates and the associated Young functions.

An entropy integrand is a convex, nonnegative ``gamma_star(z, t)`` with a
unique zero at ``t = m(z)``.  Its convex conjugate ``gamma(z, s)`` drives the
dual problem and its derivative ``gamma_prime`` maps dual potentials back to
primal densities.  The shifted function ``lambda(z, s) = gamma(z, s) - m(z) s``
is nonnegative, vanishes at 0, and its symmetrisations generate the Orlicz
spaces in which the constraint functions live.

Point dependence is carried through ``m``: every callable below broadcasts
against the array ``spec.m`` whose last axis runs over ground points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import special

from .errors import BracketFailure, NonpositiveWeightFunction, UnknownEntropy

__all__ = [
    "CATALOG",
    "Delta2Result",
    "EntropySpec",
    "Interval",
    "YoungFamily",
    "catalog",
    "conjugate_numeric",
    "delta2_classify",
    "from_gamma_star",
    "young_family",
]

CATALOG = ("boltzmann_variant", "boltzmann_special", "reverse_relative", "quadratic")

# unboundedness horizon for numeric conjugation
_S_MAX = 1e12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class Interval(NamedTuple):
    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above & below

    def interior(self, x):
        x = np.asarray(x, dtype=float)
        return (x > self.lo) & (x < self.hi)

    def reflected(self) -> "Interval":
        return Interval(-self.hi, -self.lo, self.hi_closed, self.lo_closed)

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lo_c = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lo_c = other.lo, other.lo_closed
        else:
            lo, lo_c = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_c = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hi_c = other.hi, other.hi_closed
        else:
            hi, hi_c = self.hi, self.hi_closed and other.hi_closed
        return Interval(lo, hi, lo_c, hi_c)


REAL_LINE = Interval(-np.inf, np.inf)


@dataclass(frozen=True, eq=False)
class EntropySpec:
    """Bundle ``(gamma*, gamma, gamma', gamma'', m)`` for one entropy.

    The raw callables take ``(x, m)``; use the bound methods
    :meth:`gamma_star`, :meth:`gamma`, ... which supply ``self.m``.
    """

    name: str
    m: np.ndarray
    raw_gamma_star: Callable
    raw_gamma: Callable
    raw_gamma_prime: Callable
    raw_gamma_second: Callable
    dom_gamma: Interval = REAL_LINE
    dom_gamma_star: Interval = REAL_LINE
    closed_form: bool = True
    delta2: Optional[str] = None
    params: dict = field(default_factory=dict)

    def gamma_star(self, t):
        return self.raw_gamma_star(np.asarray(t, dtype=float), self.m)

    def gamma(self, s):
        return self.raw_gamma(np.asarray(s, dtype=float), self.m)

    def gamma_prime(self, s):
        return self.raw_gamma_prime(np.asarray(s, dtype=float), self.m)

    def gamma_second(self, s):
        return self.raw_gamma_second(np.asarray(s, dtype=float), self.m)

    @property
    def size(self) -> Optional[int]:
        return None if self.m.ndim == 0 else self.m.shape[-1]

    def at_point(self, i: int) -> "EntropySpec":
        """The same integrand restricted to ground point ``i`` (scalar ``m``)."""
        m = self.m if self.m.ndim == 0 else self.m[..., i]
        return EntropySpec(
            self.name, np.asarray(m, dtype=float), self.raw_gamma_star,
            self.raw_gamma, self.raw_gamma_prime, self.raw_gamma_second,
            self.dom_gamma, self.dom_gamma_star, self.closed_form,
            self.delta2, self.params,
        )


# --- closed-form integrands -------------------------------------------------

def _boltz_gamma_star(t, m):
    with np.errstate(divide="ignore", invalid="ignore"):
        val = special.xlogy(t, t / m) - t + m
    return np.where(t < 0, np.inf, val)


def _boltz_gamma(s, m):
    with np.errstate(over="ignore"):
        return m * np.expm1(s)


def _boltz_gamma_prime(s, m):
    with np.errstate(over="ignore"):
        return m * np.exp(s)


def _reverse_gamma_star(t, m):
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -np.log(t) + t - 1.0
    return np.where(t <= 0, np.inf, val + 0.0 * m)


def _reverse_gamma(s, m):
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -np.log1p(-s)
    return np.where(s >= 1, np.inf, val + 0.0 * m)


def _reverse_gamma_prime(s, m):
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 1.0 / (1.0 - s)
    return np.where(s >= 1, np.inf, val + 0.0 * m)


def _reverse_gamma_second(s, m):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = 1.0 / (1.0 - s) ** 2
    return np.where(s >= 1, np.inf, val + 0.0 * m)


def _quad_gamma_star(t, m):
    return 0.5 * t * t + 0.0 * m


def _quad_gamma_prime(s, m):
    return s + 0.0 * m


def _quad_gamma_second(s, m):
    return np.ones_like(s) + 0.0 * m


def catalog(name: str, ground=None, m=None) -> EntropySpec:
    """Closed-form entropy from the catalog.

    ``ground`` fixes the number of points (anything with a ``size``
    attribute); without it the integrand is scalar.  ``m`` is only read by
    ``boltzmann_variant`` and must be strictly positive there.
    """
    if name not in CATALOG:
        raise UnknownEntropy(name)
    n = None if ground is None else ground.size
    if name == "boltzmann_variant":
        if m is None:
            m_arr = np.ones(() if n is None else (n,))
        else:
            m_arr = np.asarray(m, dtype=float)
            if n is not None:
                m_arr = np.broadcast_to(m_arr, (n,)).copy()
        if not np.all(m_arr > 0):
            raise NonpositiveWeightFunction(
                "boltzmann_variant needs m(z) > 0 at every point")
        return EntropySpec(
            name, m_arr, _boltz_gamma_star, _boltz_gamma, _boltz_gamma_prime,
            _boltz_gamma_prime, REAL_LINE, Interval(0.0, np.inf, True, False),
            True, "violated", {"m": m_arr.tolist()})

    if name == "boltzmann_special":
        m_arr = np.ones(() if n is None else (n,))
        return EntropySpec(
            name, m_arr, _boltz_gamma_star, _boltz_gamma, _boltz_gamma_prime,
            _boltz_gamma_prime, REAL_LINE, Interval(0.0, np.inf, True, False),
            True, "violated")

    if name == "reverse_relative":
        m_arr = np.ones(() if n is None else (n,))
        return EntropySpec(
            name, m_arr, _reverse_gamma_star, _reverse_gamma,
            _reverse_gamma_prime, _reverse_gamma_second,
            Interval(-np.inf, 1.0), Interval(0.0, np.inf), True, "violated")

    m_arr = np.zeros(() if n is None else (n,))
    return EntropySpec(
        name, m_arr, _quad_gamma_star, _quad_gamma_star, _quad_gamma_prime,
        _quad_gamma_second, REAL_LINE, REAL_LINE, True, "satisfied")


# --- numeric conjugation ----------------------------------------------------

def conjugate_numeric(f, t, tol=1e-10, domain=REAL_LINE, start=None,
                      max_iter=200, return_argmax=False):
    """``sup_s {s t - f(s)}`` for a convex scalar ``f``.

    The concave map ``s -> s t - f(s)`` is bracketed by doubling steps from
    ``start`` and then maximized by golden-section search.  ``+inf`` is
    returned when the increments along the doubling walk stop shrinking
    beyond ``|s| = 1e12``; a supremum approached only at infinity is
    returned as the limit value with argmax ``+-inf``.
    """
    t = float(t)
    dom = Interval(*domain) if not isinstance(domain, Interval) else domain

    def phi(s):
        if not (dom.lo <= s <= dom.hi):
            return -np.inf
        with np.errstate(all="ignore"):
            v = float(f(s))
        if math.isnan(v) or v == np.inf:
            return -np.inf
        return s * t - v

    if start is None:
        if dom.contains(0.0):
            start = 0.0
        elif np.isfinite(dom.lo) and np.isfinite(dom.hi):
            start = 0.5 * (dom.lo + dom.hi)
        elif np.isfinite(dom.lo):
            start = dom.lo + 1.0
        else:
            start = dom.hi - 1.0
    s0 = float(start)
    p0 = phi(s0)
    if p0 == -np.inf:
        raise BracketFailure(f"f is not finite at the start point {s0}")

    def done(value, arg):
        return (value, arg) if return_argmax else value

    h = 1.0
    if phi(s0 + h) > p0:
        direction = 1.0
    elif phi(s0 - h) > p0:
        direction = -1.0
    else:
        direction = 0.0

    if direction == 0.0:
        a, b, c = s0 - h, s0, s0 + h
    else:
        a, b = s0, s0 + direction * h
        pb = phi(b)
        if pb == np.inf:
            return done(np.inf, direction * np.inf)
        step = h
        prev_inc = pb - p0
        growing = 0
        for _ in range(max_iter):
            step *= 2.0
            c = b + direction * step
            pc = phi(c)
            if pc <= pb:
                break
            if pc == np.inf:
                return done(np.inf, direction * np.inf)
            inc = pc - pb
            ratio = inc / prev_inc if prev_inc > 0 else np.inf
            growing = growing + 1 if ratio >= 0.9 else 0
            if growing >= 3 and abs(c) > _S_MAX:
                return done(np.inf, direction * np.inf)
            if inc <= tol and ratio <= 0.6:
                return done(pc, direction * np.inf)
            a, b, pb, prev_inc = b, c, pc, inc
        else:
            raise BracketFailure(
                f"no maximizer bracketed for t={t} within {max_iter} doublings")
        if direction < 0:
            a, c = c, a

    # golden section on the triplet a < b < c with phi(b) >= phi(a), phi(c)
    golden = 1.0 - _INVPHI
    if c - b > b - a:
        x1, x2 = b, b + golden * (c - b)
    else:
        x1, x2 = b - golden * (b - a), b
    f1, f2 = phi(x1), phi(x2)
    for _ in range(max_iter):
        if c - a <= 1e-13 * (abs(x1) + abs(x2)) + 1e-300:
            break
        if f2 > f1:
            a, x1, f1 = x1, x2, f2
            x2 = _INVPHI * x1 + golden * c
            f2 = phi(x2)
        else:
            c, x2, f2 = x2, x1, f1
            x1 = _INVPHI * x2 + golden * a
            f1 = phi(x1)
    candidates = [(f1, x1), (f2, x2), (phi(a), a), (phi(c), c)]
    best, arg = max(candidates, key=lambda p: p[0])
    if best == -np.inf:
        raise BracketFailure(f"conjugate objective is -inf on the bracket for t={t}")
    if return_argmax:
        arg = _polish_argmax(phi, arg)
    return done(best, arg)


def _polish_argmax(phi, x):
    """Sharpen a golden-section argmax by bisecting on the slope sign."""
    h = 1e-5 * (1.0 + abs(x))

    def slope(u):
        return (phi(u + h) - phi(u - h)) / (2 * h)

    w = 1e-4 * (1.0 + abs(x))
    lo, hi = x - w, x + w
    with np.errstate(invalid="ignore"):
        s_lo, s_hi = slope(lo), slope(hi)
    if not (np.isfinite(s_lo) and np.isfinite(s_hi) and s_lo > 0 > s_hi):
        return x
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def from_gamma_star(gamma_star, name="custom", dom_gamma_star=REAL_LINE,
                    dom_gamma=REAL_LINE, ground=None, tol=1e-10) -> EntropySpec:
    """Entropy spec for a user-supplied scalar integrand (numeric fallback).

    ``gamma`` is obtained by numeric conjugation, ``gamma'`` as the argmax
    of the conjugation problem, ``gamma''`` by central differences of
    ``gamma'``.  The minimizer ``m`` is located numerically and must carry
    the value 0.
    """
    dom_star = Interval(*dom_gamma_star)

    def g_star_scalar(t):
        if not dom_star.contains(t):
            return np.inf
        return float(gamma_star(t))

    m_val, arg = conjugate_numeric(g_star_scalar, 0.0, tol, dom_star,
                                   return_argmax=True)
    # conjugate at 0 is -min(gamma_star)
    if abs(m_val) > 1e-8 or not np.isfinite(arg):
        raise ValueError(
            f"gamma_star must attain the minimum value 0; got min {-m_val}")
    m_scalar = float(arg)
    n = None if ground is None else ground.size
    m_arr = np.full(() if n is None else (n,), m_scalar)

    def _conj_pair(s):
        return conjugate_numeric(g_star_scalar, s, tol, dom_star,
                                 start=m_scalar, return_argmax=True)

    def raw_gamma_star(t, m):
        return np.vectorize(g_star_scalar, otypes=[float])(t) + 0.0 * m

    def raw_gamma(s, m):
        return np.vectorize(lambda x: _conj_pair(x)[0], otypes=[float])(s) + 0.0 * m

    def raw_gamma_prime(s, m):
        return np.vectorize(lambda x: _conj_pair(x)[1], otypes=[float])(s) + 0.0 * m

    def raw_gamma_second(s, m, h=1e-5):
        return (raw_gamma_prime(s + h, m) - raw_gamma_prime(s - h, m)) / (2 * h)

    return EntropySpec(name, m_arr, raw_gamma_star, raw_gamma, raw_gamma_prime,
                       raw_gamma_second, Interval(*dom_gamma), dom_star,
                       closed_form=False, delta2=None)


# --- Young functions --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class YoungFamily:
    """``lambda``, its symmetrisations and conjugates for one entropy spec."""

    spec: EntropySpec

    @property
    def m(self):
        return self.spec.m

    @property
    def analytic_delta2(self):
        return self.spec.delta2

    @property
    def dom_lambda(self) -> Interval:
        return self.spec.dom_gamma

    @property
    def dom_lambda_max(self) -> Interval:
        d = self.spec.dom_gamma
        return d.intersect(d.reflected())

    def lam(self, s):
        s = np.asarray(s, dtype=float)
        g = self.spec.gamma(s)
        with np.errstate(invalid="ignore"):
            out = g - self.spec.m * s
        return np.where(np.isposinf(g), np.inf, out)

    def lambda_max(self, s):
        s = np.asarray(s, dtype=float)
        return np.maximum(self.lam(s), self.lam(-s))

    def lambda_plus(self, s):
        return self.lam(np.abs(np.asarray(s, dtype=float)))

    def lambda_minus(self, s):
        return self.lam(-np.abs(np.asarray(s, dtype=float)))

    def lambda_star(self, t):
        """Conjugate of ``lambda``: ``gamma*(t + m)``."""
        t = np.asarray(t, dtype=float)
        if self.spec.closed_form:
            return self.spec.gamma_star(t + self.spec.m)
        return self._pointwise_conjugate("lam", self.dom_lambda, t)

    def lambda_max_star(self, t, tol=1e-10):
        """Conjugate of ``lambda_max``, by numeric conjugation at each point."""
        return self._pointwise_conjugate("lambda_max", self.dom_lambda_max,
                                         np.asarray(t, dtype=float), tol)

    def _pointwise_conjugate(self, func, dom, t, tol=1e-10):
        m = self.spec.m
        t_b, m_b = np.broadcast_arrays(t, m)
        out = np.empty(t_b.shape)
        fam_cache = {}
        for idx in np.ndindex(t_b.shape):
            mi = float(m_b[idx])
            if mi not in fam_cache:
                point_spec = EntropySpec(
                    self.spec.name, np.asarray(mi), self.spec.raw_gamma_star,
                    self.spec.raw_gamma, self.spec.raw_gamma_prime,
                    self.spec.raw_gamma_second, self.spec.dom_gamma,
                    self.spec.dom_gamma_star, self.spec.closed_form,
                    self.spec.delta2)
                bound = getattr(YoungFamily(point_spec), func)
                fam_cache[mi] = lambda s, bound=bound: float(bound(s))
            out[idx] = conjugate_numeric(fam_cache[mi], float(t_b[idx]), tol, dom)
        return out


def young_family(spec: EntropySpec) -> YoungFamily:
    return YoungFamily(spec)


@dataclass(frozen=True)
class Delta2Result:
    verdict: str  # "satisfied" | "violated" | "inconclusive"
    witness: Optional[float] = None
    constant: Optional[float] = None


def delta2_classify(family: YoungFamily, samples, max_log2_constant=20) -> Delta2Result:
    """Classify ``lambda_max`` against the growth bound ``rho(2s) <= C rho(s)``.

    Catalog entries carry an analytic verdict which is returned as is; a
    numeric witness is attached when the sample grid exhibits one.  The
    numeric search escalates ``C = 2, 4, ..., 2**max_log2_constant`` and
    looks for a sample with ``rho(2s) > C rho(s)``; it can only report a
    violation or give up.
    """
    s = np.asarray(samples, dtype=float)
    if s.ndim != 1 or s.size == 0 or np.any(np.diff(s) <= 0):
        raise ValueError("samples must be a nonempty increasing 1-d grid")
    s = np.abs(s[s != 0])
    witness = None
    top = 2.0 ** max_log2_constant
    if s.size:
        spec = family.spec if family.spec.m.ndim == 0 else family.spec.at_point(0)
        fam = YoungFamily(spec)
        r1 = fam.lambda_max(s)
        r2 = fam.lambda_max(2 * s)
        with np.errstate(invalid="ignore", over="ignore"):
            bad = (r2 > top * r1) & (r1 > 0) & np.isfinite(r1)
        if np.any(bad):
            witness = float(s[np.nonzero(bad)[0][0]])

    if family.analytic_delta2 == "satisfied":
        return Delta2Result("satisfied")
    if family.analytic_delta2 == "violated" or witness is not None:
        return Delta2Result("violated", witness, top if witness is not None else None)
    return Delta2Result("inconclusive")
