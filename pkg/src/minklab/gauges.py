"""Smooth convex gauges (Minkowski functionals) and their jets.

A body is described declaratively by a :class:`BodySpec`.  Four families
are supported:

``ellipsoid``
    ``L(v) = sqrt(v^T A v)``.
``randers``
    ``L(v) = sqrt(v^T A v) + b.v`` with ``b^T A^{-1} b < 1``.
``quartic``
    ``L(v)^2 = (Q + sqrt(Q^2 + 4 eps P)) / 2`` with ``Q = v^T A v`` and
    ``P = sum_i c_i v_i^4``.
``translated``
    The gauge of ``K - p`` for an inner body ``K`` and an interior shift
    ``p``; this is the Funk gauge at base point ``p``.

All derivative code is batched: point arrays have shape ``(m, n)`` and the
k-th derivative of ``L`` has shape ``(m,) + (n,) * k``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from ._roots import bracket_increasing, newton_bisect
from .errors import DegenerateHessian, InvalidSpec, SingularMetric, ZeroVector

FAMILIES = ("ellipsoid", "randers", "quartic", "translated")
DERIVATIVE_MODES = ("analytic", "finite-difference")

DEFINITENESS_FLOOR = 1e-8
ROOT_TOL = 1e-12
_EPS = np.finfo(float).eps


def _spd_matrix(A, n, name="A"):
    A = np.array(A, dtype=float)
    if A.shape != (n, n):
        raise InvalidSpec(f"{name} must be {n}x{n}, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidSpec(f"{name} has non-finite entries")
    if not np.allclose(A, A.T, rtol=1e-12, atol=1e-14):
        raise InvalidSpec(f"{name} is not symmetric")
    A = 0.5 * (A + A.T)
    w = np.linalg.eigvalsh(A)
    if w[0] <= DEFINITENESS_FLOOR * w[-1] or w[0] <= 0:
        raise InvalidSpec(f"{name} is not positive definite (eigenvalues {w})")
    return A


def _vector(b, n, name):
    b = np.array(b, dtype=float).reshape(-1)
    if b.shape != (n,):
        raise InvalidSpec(f"{name} must have length {n}, got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise InvalidSpec(f"{name} has non-finite entries")
    return b


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BodySpec:
    """Immutable description of a smooth convex body with the origin inside.

    Prefer the classmethod constructors (:meth:`ellipsoid`, :meth:`randers`,
    :meth:`quartic`, :meth:`translated`) to building this directly.
    Parameters are checked on construction and :class:`InvalidSpec` is
    raised on any violation.  Nested translations are collapsed, so
    ``translated`` always wraps a non-translated body.
    """

    dimension: int
    family: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = int(self.dimension)
        if n < 2:
            raise InvalidSpec(f"dimension must be >= 2, got {self.dimension}")
        object.__setattr__(self, "dimension", n)
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}")
        p = dict(self.params)
        if self.family in ("ellipsoid", "randers", "quartic"):
            p["A"] = _frozen(_spd_matrix(p.get("A"), n))
        if self.family == "randers":
            b = _vector(p.get("b"), n, "b")
            s = float(b @ np.linalg.solve(p["A"], b))
            if s >= 1.0:
                raise InvalidSpec(f"randers needs b^T A^-1 b < 1, got {s:.6g}")
            p["b"] = _frozen(b)
        elif self.family == "quartic":
            c = _vector(p.get("c"), n, "c")
            if np.any(c < 0):
                raise InvalidSpec("quartic coefficients c must be nonnegative")
            eps = float(p.get("epsilon", 0.0))
            if not np.isfinite(eps) or eps < 0:
                raise InvalidSpec(f"quartic epsilon must be >= 0, got {eps}")
            p["c"] = _frozen(c)
            p["epsilon"] = eps
        elif self.family == "translated":
            inner = p.get("inner")
            if not isinstance(inner, BodySpec):
                raise InvalidSpec("translated body needs an inner BodySpec")
            if inner.dimension != n:
                raise InvalidSpec("inner body dimension mismatch")
            shift = _vector(p.get("shift"), n, "shift")
            if inner.family == "translated":
                shift = shift + inner.params["shift"]
                inner = inner.params["inner"]
            if self._inner_gauge(inner, shift) >= 1.0:
                raise InvalidSpec("shift must lie in the interior of the inner body")
            p["inner"] = inner
            p["shift"] = _frozen(shift)
        object.__setattr__(self, "params", p)

    @staticmethod
    def _inner_gauge(inner, shift):
        if not np.any(shift):
            return 0.0
        return float(gauge_values(inner, shift[None, :])[0])

    # constructors

    @classmethod
    def ball(cls, n):
        return cls(n, "ellipsoid", {"A": np.eye(n)})

    @classmethod
    def ellipsoid(cls, A):
        A = np.asarray(A, dtype=float)
        return cls(A.shape[0], "ellipsoid", {"A": A})

    @classmethod
    def randers(cls, A, b):
        A = np.asarray(A, dtype=float)
        return cls(A.shape[0], "randers", {"A": A, "b": b})

    @classmethod
    def quartic(cls, A, c, epsilon, validate=True, samples=64):
        """Quartic perturbation of an ellipsoid.

        With ``validate`` (the default) the body is only accepted if
        :func:`validate_spec` passes on ``samples`` sphere points.
        """
        A = np.asarray(A, dtype=float)
        spec = cls(A.shape[0], "quartic", {"A": A, "c": c, "epsilon": epsilon})
        if validate:
            report = validate_spec(spec, samples)
            if not report.passed:
                raise InvalidSpec(f"quartic body failed validation: {report.failures[0]}")
        return spec

    @classmethod
    def translated(cls, inner, shift):
        return cls(inner.dimension, "translated", {"inner": inner, "shift": shift})

    # serialization

    def to_dict(self):
        out = {}
        for k, v in self.params.items():
            if isinstance(v, BodySpec):
                out[k] = v.to_dict()
            elif isinstance(v, np.ndarray):
                out[k] = v.tolist()
            else:
                out[k] = v
        return {"dimension": self.dimension, "family": self.family, "params": out}

    @classmethod
    def from_dict(cls, d):
        try:
            n = int(d["dimension"])
            family = d["family"]
            params = dict(d.get("params", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed body document: {exc}") from exc
        if family == "translated" and "inner" in params:
            params["inner"] = cls.from_dict(params["inner"])
        if family == "quartic":
            return cls.quartic(params.get("A"), params.get("c"), params.get("epsilon", 0.0))
        return cls(n, family, params)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"body document is not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    def __repr__(self):
        return f"BodySpec({self.to_json()})"

    # cached helpers

    @cached_property
    def _quadric_form(self):
        """Randers data ``(A', b')`` equal to this gauge, when one exists.

        Translates of ellipsoids and of Randers bodies are quadric bodies
        ``{y : y^T M y + 2 c.y <= k}`` whose gauge is the Randers norm
        ``sqrt(y^T (c c^T + k M) y) / k + c.y / k``.
        """
        if self.family != "translated":
            return None
        inner, p = self.params["inner"], self.params["shift"]
        if inner.family == "ellipsoid":
            M = inner.params["A"]
            c = M @ p
            k = 1.0 - p @ M @ p
        elif inner.family == "randers":
            A, b = inner.params["A"], inner.params["b"]
            M = A - np.outer(b, b)
            c = M @ p + b
            k = 1.0 - p @ M @ p - 2.0 * b @ p
        else:
            return None
        return (np.outer(c, c) + k * M) / k**2, c / k


# ---------------------------------------------------------------------------
# batched derivatives of L


def _points(V, n):
    V = np.asarray(V, dtype=float)
    single = V.ndim == 1
    V = np.atleast_2d(V)
    if V.shape[-1] != n:
        raise ValueError(f"expected points of dimension {n}, got {V.shape}")
    if np.any(~np.any(V != 0, axis=1)):
        raise ZeroVector("gauge evaluated at the zero vector")
    return V, single


def _sym3(M, v):
    # M_ij v_k + M_ik v_j + M_jk v_i
    return (np.einsum("mij,mk->mijk", M, v) + np.einsum("mik,mj->mijk", M, v)
            + np.einsum("mjk,mi->mijk", M, v))


def _quadratic_derivs(A, b, V, order):
    a = V @ A
    alpha = np.sqrt(np.einsum("mi,mi->m", V, a))
    L = alpha if b is None else alpha + V @ b
    out = [L]
    if order >= 1:
        dL = a / alpha[:, None]
        if b is not None:
            dL = dL + b
        out.append(dL)
    if order >= 2:
        aa = np.einsum("mi,mj->mij", a, a)
        out.append(A / alpha[:, None, None] - aa / alpha[:, None, None] ** 3)
    if order >= 3:
        Ab = np.broadcast_to(A, (len(V),) + A.shape)
        d3 = -_sym3(Ab, a) / alpha[:, None, None, None] ** 3
        d3 += 3.0 * np.einsum("mi,mj,mk->mijk", a, a, a) / alpha[:, None, None, None] ** 5
        out.append(d3)
    return out


def _energy_to_gauge(E, dE, d2E, d3E, order):
    L = np.sqrt(2.0 * E)
    out = [L]
    if order >= 1:
        dL = dE / L[:, None]
        out.append(dL)
    if order >= 2:
        d2L = (d2E - np.einsum("mi,mj->mij", dL, dL)) / L[:, None, None]
        out.append(d2L)
    if order >= 3:
        out.append((d3E - _sym3(d2L, dL)) / L[:, None, None, None])
    return out


def _quartic_derivs(A, c, eps, V, order):
    m, n = V.shape
    a = V @ A
    Q = np.einsum("mi,mi->m", V, a)
    P = (V**4) @ c
    R = Q**2 + 4.0 * eps * P
    S = np.sqrt(R)
    E = 0.25 * (Q + S)
    dE = d2E = d3E = None
    if order >= 1:
        dQ = 2.0 * a
        dR = 2.0 * Q[:, None] * dQ + 16.0 * eps * c * V**3
        dS = dR / (2.0 * S[:, None])
        dE = 0.25 * (dQ + dS)
    if order >= 2:
        d2Q = np.broadcast_to(2.0 * A, (m, n, n))
        d2P = np.zeros((m, n, n))
        idx = np.arange(n)
        d2P[:, idx, idx] = 12.0 * c * V**2
        d2R = 2.0 * np.einsum("mi,mj->mij", dQ, dQ) + 2.0 * Q[:, None, None] * d2Q + 4.0 * eps * d2P
        RR = np.einsum("mi,mj->mij", dR, dR)
        d2S = d2R / (2.0 * S[:, None, None]) - RR / (4.0 * S[:, None, None] ** 3)
        d2E = 0.25 * (d2Q + d2S)
    if order >= 3:
        d3P = np.zeros((m, n, n, n))
        d3P[:, idx, idx, idx] = 24.0 * c * V
        d3R = 2.0 * _sym3(d2Q, dQ) + 4.0 * eps * d3P
        S3 = S[:, None, None, None]
        d3S = (d3R / (2.0 * S3) - _sym3(d2R, dR) / (4.0 * S3**3)
               + 3.0 * np.einsum("mi,mj,mk->mijk", dR, dR, dR) / (8.0 * S3**5))
        d3E = 0.25 * d3S
    return _energy_to_gauge(E, dE, d2E, d3E, order)


def _translated_values(inner, p, V):
    """Gauge of ``K - p`` by safeguarded Newton on ``s -> L(p + s v) - 1``.

    ``s = 1 / F(v)``; the map is convex and increasing past its root, so a
    doubling bracket from ``s = 0`` is always valid.
    """
    def f(s):
        Z = p + s[:, None] * V
        L, dL = _derivs(inner, Z, 1)
        return L - 1.0, np.einsum("mi,mi->m", dL, V)

    lo = np.zeros(len(V))
    guess = 1.0 / _derivs(inner, V, 0)[0]
    lo, hi = bracket_increasing(f, lo, guess)
    s = newton_bisect(f, lo, hi, tol=ROOT_TOL)
    return 1.0 / s


def _translated_derivs(spec, V, order, closed_form=True):
    quad = spec._quadric_form if closed_form else None
    if quad is not None:
        return _quadratic_derivs(quad[0], quad[1], V, order)
    inner, p = spec.params["inner"], spec.params["shift"]
    if not np.any(p):
        return _derivs(inner, V, order)
    F = _translated_values(inner, p, V)
    out = [F]
    if order == 0:
        return out
    # implicit differentiation of L(F(y) p + y) = F(y)
    Z = F[:, None] * p + V
    inner_d = _derivs(inner, Z, order)
    ell = inner_d[1]
    q = 1.0 - ell @ p
    dF = ell / q[:, None]
    out.append(dF)
    if order >= 2:
        D = np.eye(len(p))[None] + np.einsum("j,mk->mjk", p, dF)
        Lam = inner_d[2]
        d2F = np.einsum("mjk,mjl,mlr->mkr", D, Lam, D) / q[:, None, None]
        out.append(d2F)
    if order >= 3:
        T = inner_d[3]
        w = np.einsum("mjk,mjl,l->mk", D, Lam, p)
        d3F = np.einsum("mabc,mai,mbj,mck->mijk", T, D, D, D) + _sym3(d2F, w)
        out.append(d3F / q[:, None, None, None])
    return out


def _derivs(spec, V, order):
    fam = spec.family
    if fam == "ellipsoid":
        return _quadratic_derivs(spec.params["A"], None, V, order)
    if fam == "randers":
        return _quadratic_derivs(spec.params["A"], spec.params["b"], V, order)
    if fam == "quartic":
        pr = spec.params
        return _quartic_derivs(pr["A"], pr["c"], pr["epsilon"], V, order)
    return _translated_derivs(spec, V, order)


def gauge_values(spec, V):
    """Gauge values at a batch of nonzero points ``V`` of shape ``(m, n)``."""
    V, _ = _points(V, spec.dimension)
    return _derivs(spec, V, 0)[0]


def evaluate_gauge(spec, v):
    """Minkowski functional ``L(v)``: the ``t > 0`` with ``v / t`` on the boundary.

    Raises :class:`ZeroVector` at the origin.
    """
    v, _ = _points(v, spec.dimension)
    if len(v) != 1:
        raise ValueError("evaluate_gauge takes a single vector; use gauge_values")
    return float(_derivs(spec, v, 0)[0][0])


# ---------------------------------------------------------------------------
# finite differences


def _fd_steps(V):
    scale = np.maximum(np.linalg.norm(V, axis=1), 1.0)
    return scale * _EPS ** (1 / 3), scale * _EPS ** (1 / 4), scale * _EPS ** (1 / 5)


def _central_product(fun, V, h, idx):
    """Product of first central differences along coordinate axes ``idx``."""
    n = V.shape[1]
    k = len(idx)
    total = 0.0
    for signs in np.ndindex(*(2,) * k):
        s = 1.0 - 2.0 * np.array(signs)
        offset = np.zeros(n)
        for sgn, i in zip(s, idx):
            offset[i] += sgn
        total = total + np.prod(s) * fun(V + h[:, None] * offset)
    return total / (2.0 * h) ** k


def _fd_derivs(spec, V, richardson=False):
    """L, dL, g and C3 by central differences of gauge values only."""
    m, n = V.shape
    h1, h2, h3 = _fd_steps(V)
    Lfun = lambda X: _derivs(spec, X, 0)[0]
    Efun = lambda X: 0.5 * _derivs(spec, X, 0)[0] ** 2

    def diff(fun, h, idx):
        d = _central_product(fun, V, h, idx)
        if richardson:
            d = (4.0 * _central_product(fun, V, 0.5 * h, idx) - d) / 3.0
        return d

    L = Lfun(V)
    dL = np.stack([diff(Lfun, h1, (i,)) for i in range(n)], axis=1)
    g = np.empty((m, n, n))
    for i in range(n):
        for j in range(i, n):
            g[:, i, j] = g[:, j, i] = diff(Efun, h2, (i, j))
    C3 = np.empty((m, n, n, n))
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                val = 0.5 * diff(Efun, h3, (i, j, k))
                for a, b, c in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
                    C3[:, a, b, c] = val
    return L, dL, g, C3


# ---------------------------------------------------------------------------
# jets


@dataclass(frozen=True, eq=False)
class GaugeJet:
    """Value and derivatives of a gauge at one point.

    ``g`` is the Hessian of the energy ``L^2 / 2``; ``C3`` is the lowered
    Cartan tensor, half the derivative of ``g``.
    """

    point: np.ndarray
    L: float
    dL: np.ndarray
    g: np.ndarray
    C3: np.ndarray
    derivative_mode: str = "analytic"


@dataclass(frozen=True, eq=False)
class JetBatch:
    """Batched jets; arrays carry a leading point axis."""

    points: np.ndarray
    L: np.ndarray
    dL: np.ndarray
    g: np.ndarray
    C3: np.ndarray | None = None

    def __len__(self):
        return len(self.L)

    def __getitem__(self, k):
        return GaugeJet(self.points[k], float(self.L[k]), self.dL[k], self.g[k],
                        None if self.C3 is None else self.C3[k])


def check_definite(g, floor=DEFINITENESS_FLOOR):
    """Raise :class:`DegenerateHessian` unless every matrix in ``g`` passes the floor."""
    w = np.linalg.eigvalsh(g)
    bad = ~(w[..., 0] > floor * w[..., -1])
    if np.any(bad):
        k = int(np.flatnonzero(np.atleast_1d(bad))[0])
        raise DegenerateHessian(
            f"energy Hessian not positive definite at sample {k}: eigenvalues {np.atleast_2d(w)[k]}")
    return w


def batch_jet(spec, V, mode="analytic", order=3, check=True, richardson=False):
    """Jets of ``spec`` at every row of ``V``.

    ``order=2`` skips the Cartan tensor.  Finite-difference mode ignores
    ``order`` and always fills every field.
    """
    V, _ = _points(V, spec.dimension)
    if mode == "analytic":
        d = _derivs(spec, V, order)
        L, dL, d2L = d[0], d[1], d[2]
        g = np.einsum("mi,mj->mij", dL, dL) + L[:, None, None] * d2L
        C3 = None
        if order >= 3:
            C3 = 0.5 * (_sym3(d2L, dL) + L[:, None, None, None] * d[3])
    elif mode == "finite-difference":
        L, dL, g, C3 = _fd_derivs(spec, V, richardson)
    else:
        raise ValueError(f"unknown derivative mode {mode!r}")
    g = 0.5 * (g + np.swapaxes(g, 1, 2))
    if check:
        check_definite(g)
    return JetBatch(V, L, dL, g, C3)


def gauge_jet(spec, v, mode="analytic", richardson=False):
    """Jet of the gauge at a single nonzero vector ``v``.

    Analytic mode is available for every family (translated bodies use
    implicit differentiation of the inner jet).  Finite-difference mode uses
    central differences of gauge values with optional one-level Richardson
    extrapolation.  Raises :class:`DegenerateHessian` when ``g`` fails the
    definiteness floor.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("gauge_jet takes a single vector; use batch_jet")
    jb = batch_jet(spec, v[None], mode=mode, richardson=richardson)
    return GaugeJet(jb.points[0], float(jb.L[0]), jb.dL[0], jb.g[0], jb.C3[0], mode)


def _inverse_metric(g):
    cond = np.linalg.cond(g)
    if np.any(~np.isfinite(cond)) or np.any(cond > 1.0 / (100 * _EPS)):
        raise SingularMetric("metric is numerically singular")
    return np.linalg.inv(g)


def cartan_trace(jet):
    """Trace ``C_i = g^{jk} C_ijk`` of the Cartan tensor.

    Accepts a :class:`GaugeJet` or a :class:`JetBatch` (batched result).
    """
    ginv = _inverse_metric(jet.g)
    if np.ndim(jet.g) == 2:
        return np.einsum("jk,ijk->i", ginv, jet.C3)
    return np.einsum("mjk,mijk->mi", ginv, jet.C3)


def q_curvature(jet):
    """Curvature ``Q^l_ijk = C^l_sk C^s_ij - C^l_sj C^s_ik`` as an n^4 array.

    Index order of the result is ``[l, i, j, k]`` (batched: ``[m, l, i, j, k]``).
    """
    ginv = _inverse_metric(jet.g)
    if np.ndim(jet.g) == 2:
        Cup = np.einsum("kl,ijl->kij", ginv, jet.C3)
        Q = np.einsum("lsk,sij->lijk", Cup, Cup)
        return Q - np.swapaxes(Q, 2, 3)
    Cup = np.einsum("mkl,mijl->mkij", ginv, jet.C3)
    Q = np.einsum("mlsk,msij->mlijk", Cup, Cup)
    return Q - np.swapaxes(Q, 3, 4)


# ---------------------------------------------------------------------------
# validation


def sphere_sample(n, count, seed=0):
    """Deterministic quasi-random points on the unit sphere ``S^{n-1}``."""
    sob = qmc.Sobol(d=n, scramble=True, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        u = sob.random(count)
    X = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


@dataclass
class ValidationReport:
    passed: bool
    samples: int
    min_eigenvalue: float
    min_eigen_ratio: float
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.passed


def validate_spec(spec, samples=64, seed=0):
    """Sample-based check of homogeneity, positivity and Hessian definiteness.

    ``spec`` may be a :class:`BodySpec` or a body document (mapping); a
    document whose parameters violate their constraints is reported as an
    ``InvalidSpec`` failure rather than raised.  Each failure is a tuple
    ``(check, sample_point, detail)``.  The coordinate axes are always
    sampled in addition to ``samples`` quasi-random sphere points.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not isinstance(spec, BodySpec):
        try:
            spec = BodySpec.from_dict(spec)
        except InvalidSpec as exc:
            return ValidationReport(False, 0, float("nan"), float("nan"),
                                    [("InvalidSpec", None, str(exc))])
    n = spec.dimension
    U = np.vstack([np.eye(n), -np.eye(n), sphere_sample(n, samples, seed)])
    failures = []
    L = gauge_values(spec, U)
    for t in (0.5, 2.0, 7.3):
        Lt = gauge_values(spec, t * U)
        bad = np.abs(Lt - t * L) > 1e-10 * t * L
        for k in np.flatnonzero(bad):
            failures.append(("homogeneity", U[k], f"t={t}: {Lt[k]} vs {t * L[k]}"))
    for k in np.flatnonzero(~(L > 0)):
        failures.append(("positivity", U[k], f"L={L[k]}"))
    jb = batch_jet(spec, U, order=2, check=False)
    w = np.linalg.eigvalsh(jb.g)
    ratio = w[:, 0] / w[:, -1]
    for k in np.flatnonzero(~(w[:, 0] > DEFINITENESS_FLOOR * w[:, -1])):
        failures.append(("definiteness", U[k], f"eigenvalues {w[k]}"))
    return ValidationReport(not failures, len(U), float(w[:, 0].min()), float(ratio.min()), failures)
