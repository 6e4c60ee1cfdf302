"""Vectorised safeguarded Newton iteration for monotone scalar equations."""

import numpy as np

from .errors import DidNotConverge


def bracket_increasing(f, lo, guess, maxiter=200):
    """Grow ``hi`` from ``guess`` by doubling until ``f(hi) > 0``.

    ``f`` maps an array of abscissae to ``(value, derivative)`` and is
    assumed increasing past ``lo`` with ``f(lo) < 0``.  Returns ``(lo, hi)``
    with the lower end pulled up to the last negative probe.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(guess, dtype=float)
    for _ in range(maxiter):
        val, _ = f(hi)
        neg = val <= 0.0
        if not np.any(neg):
            return lo, hi
        lo = np.where(neg, hi, lo)
        hi = np.where(neg, 2.0 * hi, hi)
    raise DidNotConverge("could not bracket root by doubling")


def newton_bisect(f, lo, hi, tol=1e-12, maxiter=100):
    """Solve ``f(x) = 0`` elementwise for increasing ``f`` on ``[lo, hi]``.

    Newton steps that leave the current bracket (or use a non-positive
    slope) are replaced by bisection.  Iteration stops once ``|f| <= tol``
    everywhere; one extra Newton step then polishes the result to
    working precision.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        val, der = f(x)
        if np.all(np.abs(val) <= tol):
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(der > 0, val / der, 0.0)
            return x - step
        lo = np.where(val < 0, x, lo)
        hi = np.where(val > 0, x, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - val / der
        ok = (der > 0) & (xn > lo) & (xn < hi) & np.isfinite(xn)
        x = np.where(ok, xn, 0.5 * (lo + hi))
    raise DidNotConverge(f"safeguarded Newton did not reach |f| <= {tol:g}")
