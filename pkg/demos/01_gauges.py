"""Gauges of a few convex bodies and their Riemann-Finsler jets."""

import numpy as np

from minklab import BodySpec, evaluate_gauge, gauge_jet, q_curvature, validate_spec

# The Euclidean ball, an off-centre (Randers) ellipse and a quartic
# perturbation of the ball.
ball = BodySpec.ball(2)
randers = BodySpec.randers(np.eye(2), [0.5, 0.0])
quartic = BodySpec.quartic(np.eye(3), [1.0, 1.0, 1.0], 0.1)

print("L_ball(3, 4)      =", evaluate_gauge(ball, [3.0, 4.0]))
print("L_randers(1, 0)   =", evaluate_gauge(randers, [1.0, 0.0]))
print("L_randers(-1, 0)  =", evaluate_gauge(randers, [-1.0, 0.0]))

# Moving the origin inside the body changes the gauge.  A translated disc is
# still a quadric, so the jet is available in closed form.
shifted = BodySpec.translated(ball, [0.5, 0.0])
print("translated disc, L(1, 0) =", evaluate_gauge(shifted, [1.0, 0.0]))
print("translated disc, L(-1, 0) =", evaluate_gauge(shifted, [-1.0, 0.0]))

# Jets: g is the Hessian of L^2 / 2, C3 half its derivative.
jet = gauge_jet(randers, [0.0, 1.0])
print("\nranders jet at (0, 1)")
print("  dL =", jet.dL)
print("  g  =\n", jet.g)

# Analytic and finite-difference jets agree to the expected orders.
v = np.array([0.3, -0.4, 0.8])
a = gauge_jet(quartic, v)
f = gauge_jet(quartic, v, mode="finite-difference")
print("\nquartic, |g_fd - g| =", np.abs(f.g - a.g).max(), " |C3_fd - C3| =", np.abs(f.C3 - a.C3).max())

# Q vanishes exactly when C3 comes from an inner product.
print("max |Q| quartic   =", np.abs(q_curvature(a)).max())
print("max |Q| ellipsoid =", np.abs(q_curvature(gauge_jet(BodySpec.ball(3), v))).max())

# Sample-based validation of the definiteness of g.
rep = validate_spec(quartic)
print(f"\nvalidate quartic: passed={rep.passed}, min eigen ratio {rep.min_eigen_ratio:.3f}")
