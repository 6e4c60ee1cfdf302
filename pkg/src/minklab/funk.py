"""Funk geometry of a convex body.

The Funk metric on the interior ``U`` of ``K`` is ``F(x, y) = L_x(y)``, the
gauge of ``K - x``.  Derivatives in ``y`` come from the analytic jets of the
translated gauge; derivatives in the base point ``x`` are always taken by
central differences with a step proportional to the interior margin.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import BasePointOutside, DegenerateTangent, ZeroVector
from .gauges import BodySpec, _derivs, evaluate_gauge, gauge_jet

INTERIOR_GUARD = 1e-3
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class FunkContext:
    """A body together with an interior base point and its translated gauge."""

    body: BodySpec
    base_point: np.ndarray
    gauge_at_p: BodySpec
    interior_margin: float

    @classmethod
    def create(cls, body, p, guard=INTERIOR_GUARD):
        p = np.asarray(p, dtype=float).reshape(-1)
        if p.shape != (body.dimension,):
            raise ValueError("base point has the wrong dimension")
        Lp = evaluate_gauge(body, p) if np.any(p) else 0.0
        if not (Lp < 1.0 and Lp <= 1.0 - guard):
            raise BasePointOutside(f"L(p) = {Lp:.6g} is outside the guarded interior (guard {guard:g})")
        return cls(body, p, BodySpec.translated(body, p), 1.0 - Lp)

    def F(self, v):
        return evaluate_gauge(self.gauge_at_p, v)

    def derivs(self, v, order=1):
        v = np.asarray(v, dtype=float)
        if not np.any(v):
            raise ZeroVector("Funk metric evaluated at the zero vector")
        return [d[0] for d in _derivs(self.gauge_at_p, v[None], order)]


def _ctx(body, p, guard=INTERIOR_GUARD):
    return p if isinstance(p, FunkContext) else FunkContext.create(body, p, guard)


def funk_value(body, p, v, guard=INTERIOR_GUARD):
    """``F(p, v)``: the ``t > 0`` with ``L(p + v / t) = 1``.

    Closed form for ellipsoid and Randers bodies, safeguarded Newton
    otherwise.  Raises :class:`BasePointOutside` unless ``L(p) <= 1 - guard``.
    """
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ZeroVector("Funk metric evaluated at the zero vector")
    return _ctx(body, p, guard).F(v)


def _x_step(ctx):
    return ctx.interior_margin * _EPS ** (1 / 3)


def funk_x_gradient(body, p, v, guard=INTERIOR_GUARD):
    """``dF/dx`` at ``(p, v)`` by central differences over the base point."""
    ctx = _ctx(body, p, guard)
    p = ctx.base_point
    h = _x_step(ctx)
    n = len(p)
    out = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out[i] = (funk_value(body, p + e, v, 0.0) - funk_value(body, p - e, v, 0.0)) / (2 * h)
    return out


def okada_residual(body, p, v, guard=INTERIOR_GUARD):
    """``F dF/dy - dF/dx`` at ``(p, v)``; vanishes for every Funk metric."""
    ctx = _ctx(body, p, guard)
    F, dF = ctx.derivs(v, 1)
    return F * dF - funk_x_gradient(body, ctx, v)


def tangent_basis(normal):
    """Orthonormal basis of ``normal``'s orthogonal complement.

    Gram-Schmidt on the coordinate vectors in index order, dropping the
    ones that are (numerically) dependent.
    """
    n = len(normal)
    basis = [normal / np.linalg.norm(normal)]
    for i in range(n):
        w = np.zeros(n)
        w[i] = 1.0
        for b in basis:
            w = w - (w @ b) * b
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            basis.append(w / nw)
        if len(basis) == n:
            break
    if len(basis) != n:
        raise DegenerateTangent("tangent basis is rank deficient")
    return np.array(basis[1:])


def conformal_factor_check(body, p, v, guard=INTERIOR_GUARD):
    """Compare the indicatrix metrics of ``L`` at ``rho`` and of ``F(p, .)`` at ``v``.

    ``rho = p + v / F(p, v)`` lies on the boundary of ``K``; on the common
    tangent space the two metrics should differ by the factor
    ``1 - p.dL(rho)``.  Returns ``(factor, deviation)`` where the deviation
    is the largest ``|g_rho(w, z) - factor g_v(w, z)|`` over basis pairs,
    scaled by ``sqrt(g_rho(w, w) g_rho(z, z))``.
    """
    ctx = _ctx(body, p, guard)
    p = ctx.base_point
    jv = gauge_jet(ctx.gauge_at_p, v)
    rho = p + np.asarray(v, dtype=float) / jv.L
    jr = gauge_jet(body, rho)
    factor = 1.0 - p @ jr.dL
    W = tangent_basis(jv.dL)
    Gr = W @ jr.g @ W.T
    Gv = W @ jv.g @ W.T
    scale = np.sqrt(np.outer(np.diag(Gr), np.diag(Gr)))
    return float(factor), float(np.max(np.abs(Gr - factor * Gv) / scale))


def projection_point(body, p, v, guard=INTERIOR_GUARD):
    """``rho(v_p) = p + v / F(p, v)`` on the boundary of ``K``."""
    ctx = _ctx(body, p, guard)
    return ctx.base_point + np.asarray(v, dtype=float) / ctx.F(v)


def spray_coefficients(body, p, v, guard=INTERIOR_GUARD):
    """``G^k = y^k F / 2`` and ``G_i^k = F delta_i^k / 2 + y^k dF/dy^i / 2``.

    The second array is indexed ``[i, k]``.
    """
    ctx = _ctx(body, p, guard)
    v = np.asarray(v, dtype=float)
    F, dF = ctx.derivs(v, 1)
    G = 0.5 * F * v
    Gik = 0.5 * F * np.eye(len(v)) + 0.5 * np.outer(dF, v)
    return G, Gik


def horizontal_lifts(body, p, v, guard=INTERIOR_GUARD):
    """Rows ``(e_i, -G_i^.)``: the horizontal vectors in ``(x, y)`` coordinates."""
    _, Gik = spray_coefficients(body, p, v, guard)
    n = len(Gik)
    return np.hstack([np.eye(n), -Gik])


def curvature_closed_form(body, p, v, X, Y, guard=INTERIOR_GUARD):
    """``(g(X, C) Y - g(Y, C) X) / 4`` with ``g`` the Funk metric at ``(p, v)``."""
    ctx = _ctx(body, p, guard)
    v = np.asarray(v, dtype=float)
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    g = gauge_jet(ctx.gauge_at_p, v).g
    return 0.25 * ((X @ g @ v) * Y - (Y @ g @ v) * X)


def curvature_commutator(body, p, v, X, Y, guard=INTERIOR_GUARD):
    """``-v[X^h, Y^h]`` for constant fields ``X``, ``Y`` by finite differences.

    ``X^h = X^i (d/dx^i - G_i^k d/dy^k)``; both the base-point and the fibre
    derivatives of ``G_i^k`` are central differences.
    """
    ctx = _ctx(body, p, guard)
    p = ctx.base_point
    v = np.asarray(v, dtype=float)
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)

    def b(Z, x, y):
        return -(Z @ spray_coefficients(body, x, y, 0.0)[1])

    hx = _x_step(ctx)
    hy = max(np.linalg.norm(v), 1.0) * _EPS ** (1 / 3)

    def dx(Z, W):  # derivative of b_Z along W in the base point
        return (b(Z, p + hx * W, v) - b(Z, p - hx * W, v)) / (2 * hx)

    def dy(Z, W):  # derivative of b_Z along W in the fibre
        return (b(Z, p, v + hy * W) - b(Z, p, v - hy * W)) / (2 * hy)

    bX, bY = b(X, p, v), b(Y, p, v)
    bracket = dx(Y, X) + dy(Y, bX) - dx(X, Y) - dy(X, bY)
    return -bracket


def curvature_check(body, p, v, X, Y, guard=INTERIOR_GUARD):
    """Largest componentwise gap between the commutator and the closed form."""
    a = curvature_commutator(body, p, v, X, Y, guard)
    c = curvature_closed_form(body, p, v, X, Y, guard)
    return float(np.max(np.abs(a - c)))


# ---------------------------------------------------------------------------
# geodesics


def theta(t, F0):
    """Reparameterisation ``(1 - exp(-t F0)) / F0`` of a straight line."""
    return -np.expm1(-np.asarray(t, dtype=float) * F0) / F0


def theta_dot(t, F0):
    return np.exp(-np.asarray(t, dtype=float) * F0)


@dataclass(frozen=True, eq=False)
class GeodesicTrace:
    p: np.ndarray
    v: np.ndarray
    F0: float
    t: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    ode_residual: np.ndarray
    endpoint: np.ndarray

    @property
    def samples(self):
        return list(zip(self.t, self.positions, self.velocities))

    def to_csv(self, fh=None):
        out = io.StringIO() if fh is None else fh
        n = len(self.p)
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)]
                   + ["ode_residual"])
        for t, x, y, r in zip(self.t, self.positions, self.velocities, self.ode_residual):
            w.writerow([repr(float(t))] + [repr(float(c)) for c in x] + [repr(float(c)) for c in y]
                       + [repr(float(r))])
        return out.getvalue() if fh is None else None


def geodesic(body, p, v, t_max=1.0, samples=11, guard=INTERIOR_GUARD):
    """Funk geodesic ``p + theta(t) v`` with ``theta(0) = 0``, ``theta'(0) = 1``.

    Also reports, at every sample, the residual of the spray equation
    ``c'' + F(c, c') c' = 0`` with ``c''`` from central differences of the
    closed-form path.  Raises :class:`BasePointOutside` if a sample lies on
    the boundary to working precision (``t_max`` too large for ``F0``).
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    ctx = _ctx(body, p, guard)
    p = ctx.base_point
    v = np.asarray(v, dtype=float)
    F0 = ctx.F(v)
    ts = np.linspace(0.0, t_max, samples)
    pos = p + theta(ts, F0)[:, None] * v
    vel = theta_dot(ts, F0)[:, None] * v
    Lpos = np.array([evaluate_gauge(body, x) if np.any(x) else 0.0 for x in pos])
    if np.any(Lpos >= 1.0):
        k = int(np.flatnonzero(Lpos >= 1.0)[0])
        raise BasePointOutside(f"geodesic sample t={ts[k]:.6g} reaches the boundary numerically; "
                               "reduce t_max")
    h = _EPS ** (1 / 4) / F0

    def c(t):
        return p + theta(t, F0) * v

    res = np.empty(samples)
    for k, t in enumerate(ts):
        acc = (c(t + h) - 2 * c(t) + c(t - h)) / h**2
        Fk = funk_value(body, pos[k], vel[k], 0.0)
        res[k] = np.linalg.norm(acc + Fk * vel[k])
    return GeodesicTrace(p, v, F0, ts, pos, vel, res, p + v / F0)
