"""The area function of a Funk space: derivatives, bounds and its minimiser."""

import numpy as np

from minklab import (
    AreaField,
    BodySpec,
    area_bounds_check,
    area_gradient,
    area_grid,
    area_hessian,
    area_value,
    build_rule,
    minimize_area,
)

trap = build_rule(2, "trapezoid2d", 256)
disc = AreaField(BodySpec.ball(2), trap)

# r(p) by the translated gauge and by the pulled-back integrand.
p = np.array([0.5, 0.0])
print("r(p) translated:", area_value(disc, p), " pulled back:", area_value(disc, p, path="pullback"))
print("bounds (lower, ratio, upper):", area_bounds_check(disc, p))
print("Hessian at the centre / (3 pi / 4):\n", area_hessian(disc, np.zeros(2)) / (0.75 * np.pi))

# An off-centre body: the gradient at 0 is half its beta, and the minimiser
# moves away from the origin.
randers = AreaField(BodySpec.randers(np.eye(2), [0.3, 0.0]), trap)
print("\nranders grad r(0):", area_gradient(randers, np.zeros(2)))
res = minimize_area(randers)
print("minimiser", res.point, "after", res.iterations, "Newton steps")

# A grid over {L <= 0.9} for contour plots.
rows = area_grid(randers, resolution=11)
print(f"\n{len(rows)} grid points, smallest Hessian eigenvalue {min(r.min_hessian_eigenvalue for r in rows):.4f}")
