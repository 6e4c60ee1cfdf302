"""Integrals over an indicatrix, pulled back to the round sphere."""

import numpy as np

from minklab import BodySpec, build_rule, integrate_indicatrix, verify_divergence_identity, verify_jacobian_lemma

ellipse = BodySpec.ellipsoid(np.diag([4.0, 1.0]))
randers = BodySpec.randers(np.eye(2), [0.3, 0.0])

# The trapezoid rule converges spectrally for smooth periodic integrands.
for N in (8, 16, 32, 64, 128):
    rule = build_rule(2, "trapezoid2d", N)
    val = integrate_indicatrix(randers, None, rule).value
    print(f"N = {N:4d}  area(randers) = {val:.15f}")

# Linear images of the ball all have the area of the round sphere for their
# own volume form.
print("\nellipse area      :", integrate_indicatrix(ellipse, None, build_rule(2, "trapezoid2d", 64)).value)
print("2 pi              :", 2 * np.pi)

# The radial map v -> |v| v / L(v) has Jacobian (|v| / L(v))^n.
print("\nJacobian lemma, relative error:", verify_jacobian_lemma(randers, [0.4, -1.1]))

# Volume of K against the Finsler density equals (1/n) of its boundary area.
lhs, rhs = verify_divergence_identity(randers, None, build_rule(2, "trapezoid2d", 256))
print(f"volume {lhs:.14f}   area / n {rhs:.14f}")

# Monte Carlo in four dimensions carries a standard error.
r4 = build_rule(4, "montecarlo", 20000, seed=1)
res = integrate_indicatrix(BodySpec.randers(np.eye(4), [0.2, 0.0, 0.0, 0.1]), None, r4)
print(f"\nn = 4 randers area {res.value:.4f} +- {res.standard_error:.4f}")
