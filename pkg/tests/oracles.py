"""Independent reference computations used by the tests.

Nothing here imports the library's derivative code: the symbolic oracle
differentiates the quartic energy with sympy and evaluates the Cartan and
Q tensors with plain nested loops.
"""

import functools
import itertools

import numpy as np
import sympy as sp
from scipy import integrate


@functools.lru_cache(maxsize=None)
def _quartic_tensors(n, eps, A=None, c=None):
    A = sp.eye(n) if A is None else sp.Matrix(A)
    c = [1] * n if c is None else list(c)
    y = sp.symbols(f"y0:{n}", real=True)
    v = sp.Matrix(y)
    Q = (v.T * A * v)[0]
    P = sum(ci * yi**4 for ci, yi in zip(c, y))
    L2 = (Q + sp.sqrt(Q**2 + 4 * sp.nsimplify(eps) * P)) / 2
    E = L2 / 2
    g = [[sp.diff(E, y[i], y[j]) for j in range(n)] for i in range(n)]
    C = [[[sp.diff(g[i][j], y[k]) / 2 for k in range(n)] for j in range(n)] for i in range(n)]
    return y, sp.lambdify(y, sp.sqrt(L2), "math"), sp.lambdify(y, g, "math"), sp.lambdify(y, C, "math")


def quartic_gauge(v, eps, A=None, c=None):
    y, L, _, _ = _quartic_tensors(len(v), eps, A, c)
    return float(L(*v))


def quartic_q_dense(v, eps, A=None, c=None):
    """``Q[l, i, j, k]`` by explicit index loops from sympy derivatives."""
    n = len(v)
    _, _, gf, Cf = _quartic_tensors(n, eps, A, c)
    g = np.array(gf(*v), dtype=float)
    C = np.array(Cf(*v), dtype=float)
    ginv = np.linalg.inv(g)
    R = range(n)
    up = np.zeros((n, n, n))  # up[k, i, j] = C^k_ij
    for k, i, j in itertools.product(R, R, R):
        up[k, i, j] = sum(ginv[k, l] * C[i, j, l] for l in R)
    Q = np.zeros((n, n, n, n))
    for l, i, j, k in itertools.product(R, R, R, R):
        Q[l, i, j, k] = sum(up[l, s, k] * up[s, i, j] - up[l, s, j] * up[s, i, k] for s in R)
    return Q


def tau_q_points(count=10, seed=2024):
    """Fixed oracle directions: the diagonal plus ``count - 1`` seeded ones."""
    rng = np.random.default_rng(seed)
    U = np.vstack([np.ones(3) / np.sqrt(3), rng.standard_normal((count - 1, 3))])
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def ball_area_oracle(p):
    """``r(p) = int_0^{2 pi} (1 - p.u)^{-1/2} dtheta`` for the unit disc."""
    p = np.asarray(p, dtype=float)
    f = lambda t: (1.0 - p[0] * np.cos(t) - p[1] * np.sin(t)) ** -0.5
    return integrate.quad(f, 0.0, 2.0 * np.pi, epsabs=1e-14, epsrel=2e-14, limit=200)[0]


def ellipse_mu_area_oracle(a11, a22):
    """Area of ``{a11 x^2 + a22 y^2 = 1}`` for the metric volume form of its own gauge.

    Parameterise ``x(t) = (cos t / sqrt(a11), sin t / sqrt(a22))``.  The induced
    form on the indicatrix is ``sqrt(det g) * (x dy - y dx)`` with the radial
    component ``L(x) = 1``, and ``det g = a11 a22`` for a quadratic gauge.
    """
    s1, s2 = 1.0 / np.sqrt(a11), 1.0 / np.sqrt(a22)

    def integrand(t):
        x, y = s1 * np.cos(t), s2 * np.sin(t)
        dx, dy = -s1 * np.sin(t), s2 * np.cos(t)
        return np.sqrt(a11 * a22) * (x * dy - y * dx)

    return integrate.quad(integrand, 0.0, 2.0 * np.pi, epsabs=1e-13, epsrel=1e-12)[0]


def quartic_metric(v, eps, A=None, c=None):
    """Energy Hessian of the quartic gauge from the symbolic derivative."""
    _, _, gf, _ = _quartic_tensors(len(v), eps, A, c)
    return np.array(gf(*v), dtype=float)


def randers_disc_moments(b):
    """Area and beta of the indicatrix of ``|v| + b.v`` in the plane.

    Uses the classical determinant ``det g = (L / |v|)^3`` of a Randers
    metric over the identity, so on the unit circle the pulled-back density
    is ``L^-2 * L^(3/2) = L^(-1/2)`` and ``dL = u + b``.
    """
    b = np.asarray(b, dtype=float)

    def L(t):
        return 1.0 + b[0] * np.cos(t) + b[1] * np.sin(t)

    def q(f):
        return integrate.quad(f, 0.0, 2.0 * np.pi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]

    area = q(lambda t: L(t) ** -0.5)
    beta = np.array([q(lambda t: L(t) ** -0.5 * (np.cos(t) + b[0])),
                     q(lambda t: L(t) ** -0.5 * (np.sin(t) + b[1]))])
    return area, beta
