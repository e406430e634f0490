"""Problem builders shared by the test modules."""
import numpy as np

from entropydual import (
    CATALOG, GroundSpace, MarginalProblem, MomentMap, MomentProblem, TargetSet, catalog,
    dual_objective,
)


def moments(g, k=2):
    """Rows ``1, z, ..., z^(k-1)`` on a numeric ground space."""
    z = g.coords
    return MomentMap([z ** j for j in range(k)])


def two_point(name, x, options=None):
    g = GroundSpace([0, 1], [1, 1])
    return MomentProblem(catalog(name, g), moments(g), TargetSet.singleton(x), g, options)


def quadratic_3pt(options=None):
    g = GroundSpace([-1, 0, 1], [1, 1, 1])
    return MomentProblem(catalog("quadratic", g), [[-1, 0, 1]], TargetSet.singleton([0.5]),
                         g, options)


def gaussian_problem(options=None):
    z = np.linspace(-5, 5, 201)
    g = GroundSpace(z, np.full(201, 0.05))
    return MomentProblem(catalog("boltzmann_special", g), moments(g, 3),
                         TargetSet.singleton([1, 0, 1]), g, options)


GROUNDS = {
    "three": GroundSpace([0, 1, 2], [1 / 3] * 3),
    "skewed": GroundSpace([-1.0, -0.5, 0.5, 1.0], [0.1, 0.4, 0.3, 0.2]),
    "four": GroundSpace([0, 1, 2, 3], [0.25] * 4),
}

TARGETS = {
    "three": [TargetSet.singleton([1, 1.4]), TargetSet.box([1, 1.6], [0, 0.2])],
    "skewed": [TargetSet.singleton([1, 0.3]), TargetSet.box([1, -0.4], [0.1, 0.1])],
    "four": [TargetSet.singleton([1, 2.1]), TargetSet.box([1.1, 0.8], [0.05, 0.3])],
}


def make_spec(name, g):
    m = np.linspace(0.5, 1.5, g.size) if name == "boltzmann_variant" else None
    return catalog(name, g, m)


def desk_suite(options=None):
    """24 interior instances: every catalog entropy on every ground, both target kinds."""
    out = []
    for name in CATALOG:
        for gname, g in GROUNDS.items():
            for target in TARGETS[gname]:
                label = f"{name}/{gname}/{target.kind}"
                out.append((label, MomentProblem(make_spec(name, g), moments(g), target, g,
                                                 options)))
    return out


def labeled_corpus():
    """Hand-labeled qualification corpus: ``(label, problem, expected icor verdict)``."""
    g2 = GroundSpace([0, 1], [1, 1])
    g3 = GroundSpace([0, 1, 2], [1, 1, 1])
    cases = [
        ("bs mean .7", "boltzmann_special", g2, TargetSet.singleton([1, 0.7]), "Interior"),
        ("bs mean 1", "boltzmann_special", g2, TargetSet.singleton([1, 1]), "Boundary"),
        ("bs mean 0", "boltzmann_special", g2, TargetSet.singleton([1, 0]), "Boundary"),
        ("bs mean 2", "boltzmann_special", g2, TargetSet.singleton([1, 2]), "Infeasible"),
        ("bv mean 1.5", "boltzmann_variant", g3, TargetSet.singleton([1, 1.5]), "Interior"),
        ("bv mean 2", "boltzmann_variant", g3, TargetSet.singleton([1, 2]), "Boundary"),
        ("bv box above", "boltzmann_variant", g3, TargetSet.box([1, 2.5], [0, 0.5]), "Boundary"),
        ("bv mean -1", "boltzmann_variant", g3, TargetSet.singleton([1, -1]), "Infeasible"),
        ("rr mean .7", "reverse_relative", g2, TargetSet.singleton([1, 0.7]), "Interior"),
        ("rr box", "reverse_relative", g3, TargetSet.box([1, 1], [0, 0.5]), "Interior"),
        ("rr mean 1", "reverse_relative", g2, TargetSet.singleton([1, 1]), "Infeasible"),
        ("rr mean 3", "reverse_relative", g3, TargetSet.singleton([1, 3]), "Infeasible"),
    ]
    out = []
    for label, name, g, target, expected in cases:
        out.append((label, MomentProblem(make_spec(name, g), moments(g), target, g), expected))
    return out


def random_dual_points(problem, n, rng, scale=1.5):
    """Points with finite dual objective, away from the domain boundary."""
    out = []
    while len(out) < n:
        y = rng.normal(scale=scale, size=problem.K)
        s = problem.theta.theta.T @ y
        if problem.spec.dom_gamma.hi < np.inf and s.max() > 0.9:
            continue
        out.append(y)
    return out


def fd_gradient(problem, y, h=1e-6):
    """Centered differences of the dual objective."""
    g = np.empty_like(y)
    for k in range(y.size):
        e = np.zeros_like(y)
        e[k] = h
        g[k] = (dual_objective(problem, y + e) - dual_objective(problem, y - e)) / (2 * h)
    return g


def random_marginal_problem(seed, n=5):
    """Positive kernel with random targets of equal mass."""
    rng = np.random.default_rng(seed)
    R = rng.uniform(0.05, 1.0, (n, n))
    a = rng.dirichlet(np.ones(n))
    b = rng.dirichlet(np.ones(n))
    b *= a.sum() / b.sum()
    return MarginalProblem(R, a, b)
