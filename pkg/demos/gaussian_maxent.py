"""Maximum entropy density with prescribed mean and variance on a grid.

With relative entropy and the moments 1, z, z^2 fixed to (1, 0, 1) the
minimizer is the discretized standard normal, so the dual solution is
close to (-log sqrt(2 pi), 0, -1/2).
"""
import math

import numpy as np

from entropydual import GroundSpace, MomentProblem, TargetSet, catalog, solve

z = np.linspace(-5, 5, 201)
g = GroundSpace(z, np.full(z.size, z[1] - z[0]))
p = MomentProblem(catalog("boltzmann_special", g), [np.ones_like(z), z, z * z],
                  TargetSet.singleton([1.0, 0.0, 1.0]), g)

result, cert = solve(p)
print("status:", result.status, "after", len(result.trace) - 1, "Newton steps")
print("y_hat:", result.y_hat, " reference:", [-0.5 * math.log(2 * math.pi), 0.0, -0.5])
print("duality gap:", cert.gap, " Young residual:", cert.young_residual)
density = np.exp(-z * z / 2) / math.sqrt(2 * math.pi)
print("max |q_hat - normal density|:", np.max(np.abs(cert.q_hat - density)))
