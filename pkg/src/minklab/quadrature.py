"""Quadrature on the Euclidean unit sphere and indicatrix pullback.

Integrals over the indicatrix ``dK = {L = 1}`` against its induced volume
form are pulled back to the unit sphere: for a zero-homogeneous ``f``

    int_{dK} f mu = int_{S^{n-1}} L(u)^{-n} f(u) sqrt(det g(u)) dsigma(u).
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ndtri
from scipy.stats import qmc

from .errors import NonFiniteIntegrand, NotZeroHomogeneous, UnsupportedKind, ZeroVector
from .gauges import batch_jet, evaluate_gauge

RULE_KINDS = ("trapezoid2d", "gauss_product3d", "montecarlo", "qmc")
STOCHASTIC_KINDS = ("montecarlo", "qmc")
RADIAL_NODES = 64


def sphere_area(n):
    """Area of the unit sphere ``S^{n-1}`` in ``R^n``."""
    return float(2.0 * math.pi ** (n / 2) / math.exp(gammaln(n / 2)))


@dataclass(frozen=True, eq=False)
class SphereRule:
    """Nodes and positive weights on ``S^{n-1}``."""

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    node_count: int
    shape: tuple = ()
    seed: int | None = None

    @property
    def stochastic(self):
        return self.kind in STOCHASTIC_KINDS

    def descriptor(self):
        d = {"kind": self.kind, "dimension": self.dimension, "node_count": self.node_count}
        if self.shape:
            d["shape"] = list(self.shape)
        if self.seed is not None:
            d["seed"] = self.seed
        return d


def _gauss_shape(node_count):
    if isinstance(node_count, (tuple, list)):
        nt, nphi = (int(x) for x in node_count)
    else:
        nt = int(node_count)
        nphi = 2 * nt
    return nt, nphi


def build_rule(n, kind, node_count, seed=0):
    """Build a :class:`SphereRule` of the requested ``kind``.

    ``trapezoid2d`` (n = 2) is the uniform angular grid.  ``gauss_product3d``
    (n = 3) is Gauss-Legendre in ``cos(theta)`` times a uniform azimuth
    grid; ``node_count`` is either ``(n_theta, n_phi)`` or ``n_theta`` with
    ``n_phi = 2 n_theta``.  ``montecarlo`` and ``qmc`` use normalised
    Gaussian (pseudo-random or scrambled Sobol) directions with equal
    weights; their ``seed`` fixes the draw.
    """
    if kind not in RULE_KINDS:
        raise UnsupportedKind(f"unknown rule kind {kind!r}")
    if n < 2:
        raise UnsupportedKind("sphere rules need n >= 2")
    area = sphere_area(n)
    if kind == "trapezoid2d":
        if n != 2:
            raise UnsupportedKind("trapezoid2d is only available for n = 2")
        N = int(node_count)
        if N < 4:
            raise ValueError("node_count must be >= 4")
        theta = 2.0 * np.pi * np.arange(N) / N
        nodes = np.column_stack([np.cos(theta), np.sin(theta)])
        return SphereRule(2, _ro(nodes), _ro(np.full(N, area / N)), kind, N, (N,))
    if kind == "gauss_product3d":
        if n != 3:
            raise UnsupportedKind("gauss_product3d is only available for n = 3")
        nt, nphi = _gauss_shape(node_count)
        if nt * nphi < 4 or nt < 1 or nphi < 1:
            raise ValueError("node_count must give at least 4 nodes")
        x, w = np.polynomial.legendre.leggauss(nt)
        phi = 2.0 * np.pi * np.arange(nphi) / nphi
        X, P = np.meshgrid(x, phi, indexing="ij")
        S = np.sqrt(1.0 - X**2)
        nodes = np.column_stack([(S * np.cos(P)).ravel(), (S * np.sin(P)).ravel(), X.ravel()])
        weights = np.repeat(w * (2.0 * np.pi / nphi), nphi)
        return SphereRule(3, _ro(nodes), _ro(weights), kind, nt * nphi, (nt, nphi))
    N = int(node_count)
    if N < 4:
        raise ValueError("node_count must be >= 4")
    if kind == "montecarlo":
        X = np.random.default_rng(seed).standard_normal((N, n))
    else:
        sob = qmc.Sobol(d=n, scramble=True, seed=seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            u = sob.random(N)
        X = ndtri(np.clip(u, 1e-15, 1 - 1e-15))
    nodes = X / np.linalg.norm(X, axis=1, keepdims=True)
    return SphereRule(n, _ro(nodes), _ro(np.full(N, area / N)), kind, N, (N,), seed)


def _ro(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def weighted_sum(values):
    """Sum over the leading (node) axis with numpy's pairwise reduction."""
    v = np.moveaxis(np.asarray(values, dtype=float), 0, -1)
    return np.ascontiguousarray(v).sum(axis=-1)


def rule_to_csv(rule, fh=None):
    """Write nodes and weights as CSV (``x1..xn,weight``); returns the text if ``fh`` is None."""
    out = io.StringIO() if fh is None else fh
    w = csv.writer(out, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(rule.dimension)] + ["weight"])
    for x, wt in zip(rule.nodes, rule.weights):
        w.writerow([repr(float(c)) for c in x] + [repr(float(wt))])
    return out.getvalue() if fh is None else None


# ---------------------------------------------------------------------------
# indicatrix integrals


@dataclass(frozen=True)
class IndicatrixIntegral:
    value: float | np.ndarray
    standard_error: float | np.ndarray
    rule_used: dict


@dataclass(frozen=True, eq=False)
class IndicatrixMeasure:
    """Jets at the rule nodes plus the pulled-back weights ``w L^-n sqrt(det g)``."""

    jets: object
    density: np.ndarray
    rule: SphereRule


def indicatrix_measure(spec, rule, order=2, mode="analytic"):
    if rule.dimension != spec.dimension:
        raise ValueError("rule and body dimensions differ")
    jb = batch_jet(spec, rule.nodes, mode=mode, order=order)
    det = np.linalg.det(jb.g)
    with np.errstate(invalid="ignore"):
        dens = rule.weights * jb.L ** (-spec.dimension) * np.sqrt(det)
    if not np.all(np.isfinite(dens)):
        k = int(np.flatnonzero(~np.isfinite(dens))[0])
        raise NonFiniteIntegrand(f"volume density not finite at node {k}")
    return IndicatrixMeasure(jb, dens, rule)


def reduce_measure(measure, values):
    """Integrate per-node ``values`` (shape ``(N, ...)``) against ``measure``.

    Returns ``(value, standard_error)``; the error is zero for deterministic
    rules and the sample standard error of the mean otherwise.
    """
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NonFiniteIntegrand("integrand is not finite at some node")
    dens = measure.density.reshape((-1,) + (1,) * (values.ndim - 1))
    terms = dens * values
    value = weighted_sum(terms)
    if measure.rule.stochastic:
        N = len(terms)
        se = np.std(terms * N, axis=0, ddof=1) / math.sqrt(N)
    else:
        se = np.zeros_like(value)
    return value, se


def _check_zero_homogeneous(f, nodes, seed=0):
    rng = np.random.default_rng(seed)
    pick = nodes[rng.choice(len(nodes), size=min(3, len(nodes)), replace=False)]
    a = np.asarray(f(pick), dtype=float)
    b = np.asarray(f(2.0 * pick), dtype=float)
    if np.any(np.abs(b - a) > 1e-8 * (1.0 + np.abs(a))):
        raise NotZeroHomogeneous("integrand is not zero-homogeneous (f(2u) != f(u))")


def _evaluate_field(f, U):
    if f is None:
        return np.ones(len(U))
    vals = np.asarray(f(U), dtype=float)
    if vals.ndim == 0 or vals.shape[0] != len(U):
        raise ValueError("field must map an (m, n) array of points to m values")
    return vals


def integrate_indicatrix(spec, f, rule, mode="analytic", check_homogeneity=True):
    """Integral of a zero-homogeneous field over the indicatrix of ``spec``.

    ``f`` takes an ``(m, n)`` array of nonzero points and returns ``m``
    values (or ``(m, ...)`` arrays for tensor-valued fields); ``None``
    stands for the constant 1.  The field is spot-checked for
    zero-homogeneity at three nodes.
    """
    if f is not None and check_homogeneity:
        _check_zero_homogeneous(f, rule.nodes)
    meas = indicatrix_measure(spec, rule, order=2, mode=mode)
    value, se = reduce_measure(meas, _evaluate_field(f, rule.nodes))
    if np.ndim(value) == 0:
        value, se = float(value), float(se)
    return IndicatrixIntegral(value, se, rule.descriptor())


def verify_jacobian_lemma(spec, v):
    """Relative error between ``det J T(v)`` and ``phi(v)^n`` for ``T(v) = phi(v) v``.

    ``phi = |v| / L(v)``; the Jacobian is taken by central differences.
    """
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ZeroVector("Jacobian check at the zero vector")
    n = spec.dimension

    def T(x):
        return np.linalg.norm(x) / evaluate_gauge(spec, x) * x

    h = max(np.linalg.norm(v), 1.0) * np.finfo(float).eps ** (1 / 3)
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (T(v + e) - T(v - e)) / (2.0 * h)
    phin = (np.linalg.norm(v) / evaluate_gauge(spec, v)) ** n
    return abs(np.linalg.det(J) - phin) / phin


def verify_divergence_identity(spec, f, rule, mode="analytic"):
    """Return ``(int_K f dmu, (1/n) int_{dK} f mu)``.

    The volume integral is evaluated by radial extension: on each ray the
    integrand ``f sqrt(det g) r^{n-1}`` is sampled at 64 Gauss-Legendre
    points of ``[0, 1/L(u)]``.
    """
    n = spec.dimension
    if f is not None:
        _check_zero_homogeneous(f, rule.nodes)
    rhs = integrate_indicatrix(spec, f, rule, mode=mode, check_homogeneity=False).value / n
    x, w = np.polynomial.legendre.leggauss(RADIAL_NODES)
    s, ws = 0.5 * (x + 1.0), 0.5 * w
    R = 1.0 / batch_jet(spec, rule.nodes, order=2, mode=mode).L
    inner = np.zeros(len(rule.nodes))
    for sj, wj in zip(s, ws):
        P = (R * sj)[:, None] * rule.nodes
        jb = batch_jet(spec, P, order=2, mode=mode)
        fv = _evaluate_field(f, P)
        inner += wj * R * fv * np.sqrt(np.linalg.det(jb.g)) * (R * sj) ** (n - 1)
    if not np.all(np.isfinite(inner)):
        raise NonFiniteIntegrand("radial integrand not finite")
    lhs = float(weighted_sum(rule.weights * inner))
    return lhs, float(rhs)
