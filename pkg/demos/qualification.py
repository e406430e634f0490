"""Where does the target sit relative to the attainable moments?

Two-point space z in {0, 1} with relative entropy: the attainable means
of a probability are [0, 1].  Inside, the dual optimum is attained; on
the edge the infimum is finite but the dual runs off to infinity; beyond
it there is no feasible density.
"""
from entropydual import (
    GroundSpace, MomentProblem, TargetSet, brute_force_primal, catalog, feasibility_check,
    icor_check, solve_dual,
)

g = GroundSpace([0, 1], [1, 1])
spec = catalog("boltzmann_special", g)
for mean in (0.7, 1.0, 2.0):
    p = MomentProblem(spec, [[1, 1], [0, 1]], TargetSet.singleton([1.0, mean]), g)
    res = solve_dual(p)
    line = (f"mean {mean}: feasibility {feasibility_check(p).verdict:10s} "
            f"icor {icor_check(p).verdict:10s} solver {res.status}")
    if res.status == "DualUnbounded":
        line += f" (supremum finite: {res.sup_finite})"
    print(line)
    if mean <= 1.0:
        print("   brute-force primal value:", brute_force_primal(p).value)
