"""Flat Q curvature plus a balanced body: the ellipsoid test in dimension three."""

import warnings

import numpy as np

from minklab import BodySpec, brickell_diagnostic, build_rule

rule = build_rule(3, "gauss_product3d", 32)
bodies = {
    "ellipsoid": BodySpec.ellipsoid(np.diag([1.0, 2.0, 3.0])),
    "quartic": BodySpec.quartic(np.eye(3), [1.0, 1.0, 1.0], 0.1),
    "translated ball": BodySpec.translated(BodySpec.ball(3), [0.2, 0.0, -0.1]),
}
for name, body in bodies.items():
    rep = brickell_diagnostic(body, rule, samples=200)
    print(f"{name:16s} q_norm {rep.q_norm:.3e}  balanced {rep.balanced!s:5s}  "
          f"fit residual {rep.ellipsoid_residual:.2e}  -> {rep.verdict}")

# The statement needs n >= 3; in the plane every body has Q = 0.
with warnings.catch_warnings(record=True) as w:
    warnings.simplefilter("always")
    rep = brickell_diagnostic(BodySpec.quartic(np.eye(2), [1.0, 1.0], 0.3), build_rule(2, "trapezoid2d", 128))
print(f"\nplane quartic: q_norm {rep.q_norm:.1e}, verdict {rep.verdict!r}, warning: {w[0].message}")
