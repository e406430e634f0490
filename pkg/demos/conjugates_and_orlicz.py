"""Young functions of the catalog entropies and the Orlicz norms they induce."""
import numpy as np

from entropydual import (
    CATALOG, GroundSpace, catalog, conjugate_numeric, delta2_classify, holder_check,
    luxemburg_norm, young_family,
)

# gamma and gamma* are convex conjugates: check the Fenchel-Young equality at s
s = 0.4
for name in CATALOG:
    spec = catalog(name)
    t = spec.gamma_prime(s)
    print(f"{name:18s} gamma({s}) = {float(spec.gamma(s)):.6f}  "
          f"gamma*(gamma'(s)) + gamma(s) - s gamma'(s) = "
          f"{float(spec.gamma_star(t) + spec.gamma(s) - s * t):.1e}")

# numeric conjugation recovers gamma from gamma* alone
spec = catalog("boltzmann_special")
print("numeric gamma(0.4):", conjugate_numeric(spec.gamma_star, 0.4, domain=spec.dom_gamma_star))

# the growth of lambda_max decides whether the Orlicz space is "small"
for name in CATALOG:
    samples = np.linspace(0.05, 0.95, 19) if name == "reverse_relative" else np.linspace(1, 30, 30)
    print(f"{name:18s} Delta2: {delta2_classify(young_family(catalog(name)), samples).verdict}")

# Luxemburg norms and the Hoelder inequality on a three-point space
g = GroundSpace([0, 1, 2], [0.25, 0.25, 0.5])
fam = young_family(catalog("boltzmann_special"))
u, v = np.array([1.0, -2.0, 0.5]), np.array([0.3, 0.1, -0.7])
print("||u|| under lambda_max:", luxemburg_norm(u, fam.lambda_max, g))
print("Hoelder:", holder_check(u, v, fam, g))
