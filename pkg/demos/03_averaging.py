"""Averaged inner products, the beta functional and associated Randers norms."""

import numpy as np

from minklab import BodySpec, averaged_report, build_rule, isometry_invariance_check, make_randers

trap = build_rule(2, "trapezoid2d", 256)

# For the round disc the averages are multiples of the identity.
rep = averaged_report(BodySpec.ball(2), trap)
print("ball: area", rep.area, "\nGamma1\n", rep.Gamma1.round(12), "\nGamma3\n", rep.Gamma3.round(12))

# For the round 3-ball gamma2 = (2/3) gamma1.
rep3 = averaged_report(BodySpec.ball(3), build_rule(3, "gauss_product3d", 32))
print("\n3-ball lambda estimate:", rep3.lambda_estimate())

# A Randers body is not balanced: its beta points along b.
rnd = averaged_report(BodySpec.randers(np.eye(2), [0.3, 0.0]), trap)
print("\nranders beta", rnd.beta, "balanced:", rnd.balanced)
print("sup norms of beta / area:", rnd.beta_sup_norm_G1, rnd.beta_sup_norm_G3)

F1 = make_randers(rnd, "F1")
v = np.array([1.0, 0.5])
print("associated F1(v) =", F1(v), " as a body:", F1.to_body_spec().family)

# Linear isometries of the gauge preserve every average.
quartic = BodySpec.quartic(np.eye(2), [1.0, 1.0], 0.5)
swap = np.array([[0.0, 1.0], [1.0, 0.0]])
print("\nquartic, coordinate swap: deviation", isometry_invariance_check(quartic, swap, trap).deviation)
