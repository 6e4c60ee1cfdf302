"""The Funk metric of a convex body: Okada's identity, projection and geodesics."""

import numpy as np

from minklab import (
    BodySpec,
    conformal_factor_check,
    curvature_check,
    funk_value,
    geodesic,
    okada_residual,
    projection_point,
)

body = BodySpec.ellipsoid(np.diag([1.0, 4.0]))
p = np.array([0.2, 0.1])
v = np.array([1.0, 1.0])

# F(p, v) is the gauge of the body seen from p.
print("F(p, v) =", funk_value(body, p, v))
print("rho     =", projection_point(body, p, v))

# dF/dx = F dF/dy holds at every point; x-derivatives are finite differences.
print("Okada residual:", okada_residual(body, p, v))

# The indicatrix of F(p, .) and the body boundary are conformal under rho.
factor, dev = conformal_factor_check(body, p, v)
print(f"conformal factor {factor:.6f}, deviation {dev:.2e}")

# Curvature of the horizontal distribution, commutator vs closed form.
print("curvature gap:", curvature_check(body, p, v, [1.0, 0.0], [0.3, 1.0]))

# Geodesics are straight lines run with an exponentially slowing clock.
tr = geodesic(body, p, v, t_max=3.0, samples=7)
for t, x, _ in tr.samples:
    print(f"t = {t:.2f}  x = {x}")
print("endpoint (t -> infinity):", tr.endpoint, " max ODE residual", tr.ode_residual.max())
