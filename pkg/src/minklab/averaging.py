"""Averaged inner products, the beta functional and associated Randers norms."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NotAFinslerNorm, NotAnIsometry, SingularGamma
from .gauges import BodySpec, cartan_trace, gauge_values
from .quadrature import indicatrix_measure, reduce_measure

SCHEMA_VERSION = "1.0"
BALANCE_TOLERANCE = 1e-8


def _sym(M):
    return 0.5 * (M + M.T)


@dataclass(frozen=True, eq=False)
class AveragedReport:
    """Indicatrix averages of ``g``, ``dL (x) dL`` and ``dL`` for one body.

    ``gamma*`` are the raw integrals, ``Gamma*`` the area-normalised ones.
    ``beta_sup_norm_G1`` / ``_G3`` are the dual norms of ``beta / area``
    with respect to ``Gamma1`` / ``Gamma3``.
    """

    area: float
    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma3: np.ndarray
    beta: np.ndarray
    balanced: bool
    beta_sup_norm_G1: float
    beta_sup_norm_G3: float
    standard_errors: dict | None = None
    metadata: dict = field(default_factory=dict)
    spec: BodySpec | None = None

    @property
    def Gamma1(self):
        return self.gamma1 / self.area

    @property
    def Gamma2(self):
        return self.gamma2 / self.area

    @property
    def Gamma3(self):
        return self.gamma3 / self.area

    @property
    def dimension(self):
        return len(self.beta)

    def lambda_estimate(self):
        """Least-squares ``lam`` in ``gamma2 ~ lam gamma1`` and the relative misfit."""
        lam = float(np.sum(self.gamma2 * self.gamma1) / np.sum(self.gamma1 * self.gamma1))
        resid = float(np.linalg.norm(self.gamma2 - lam * self.gamma1) / np.linalg.norm(self.gamma2))
        return lam, resid

    def to_dict(self):
        def rows(M):
            return np.asarray(M).tolist()

        lam, resid = self.lambda_estimate()
        d = {
            "schema_version": SCHEMA_VERSION,
            "metadata": dict(self.metadata),
            "area": self.area,
            "gamma1": rows(self.gamma1),
            "gamma2": rows(self.gamma2),
            "gamma3": rows(self.gamma3),
            "Gamma1": rows(self.Gamma1),
            "Gamma2": rows(self.Gamma2),
            "Gamma3": rows(self.Gamma3),
            "beta": rows(self.beta),
            "balanced": bool(self.balanced),
            "beta_sup_norm_G1": self.beta_sup_norm_G1,
            "beta_sup_norm_G3": self.beta_sup_norm_G3,
            "lambda_estimate": {"lambda": lam, "relative_misfit": resid},
        }
        if self.spec is not None:
            d["body"] = self.spec.to_dict()
        if self.standard_errors is not None:
            d["standard_errors"] = {k: rows(v) for k, v in self.standard_errors.items()}
        return d

    def to_json(self, **kw):
        kw.setdefault("indent", 2)
        kw.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kw)


def _dual_norm(G, b):
    try:
        c = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise SingularGamma("averaged inner product is not positive definite") from exc
    y = np.linalg.solve(c, b)
    return float(np.sqrt(y @ y))


def averaged_report(spec, rule, mode="analytic", balance_tolerance=BALANCE_TOLERANCE):
    """Integrate ``g``, ``dL (x) dL``, ``dL`` and ``1`` over the indicatrix.

    ``gamma2 = gamma1 - gamma3`` is the average of the angular metric.  The
    body is reported balanced when ``max |beta_i| <= balance_tolerance * area``.
    Raises :class:`SingularGamma` if ``Gamma1`` or ``Gamma3`` is not SPD.
    """
    meas = indicatrix_measure(spec, rule, order=2, mode=mode)
    jb = meas.jets
    outer = np.einsum("mi,mj->mij", jb.dL, jb.dL)
    area, se_area = reduce_measure(meas, np.ones(len(jb)))
    g1, se1 = reduce_measure(meas, jb.g)
    g3, se3 = reduce_measure(meas, outer)
    beta, se_b = reduce_measure(meas, jb.dL)
    area = float(area)
    g1, g3 = _sym(g1), _sym(g3)
    g2 = g1 - g3
    ses = None
    if rule.stochastic:
        _, se2 = reduce_measure(meas, jb.g - outer)
        ses = {"area": se_area, "gamma1": se1, "gamma2": se2, "gamma3": se3, "beta": se_b}
    n1 = _dual_norm(g1 / area, beta / area)
    n3 = _dual_norm(g3 / area, beta / area)
    meta = {"rule": rule.descriptor(), "derivative_mode": mode,
            "tolerances": {"balance_tolerance": balance_tolerance}}
    balanced = bool(np.max(np.abs(beta)) <= balance_tolerance * area)
    return AveragedReport(area, g1, g2, g3, beta, balanced, n1, n3, ses, meta, spec)


def remark1_identity_residual(spec, v, rule, mode="analytic"):
    """Residual of ``v^i int L C_i mu = (n - 1) beta(v)``, scaled by ``1 + |beta(v)|``."""
    v = np.asarray(v, dtype=float)
    meas = indicatrix_measure(spec, rule, order=3, mode=mode)
    jb = meas.jets
    LC = jb.L[:, None] * cartan_trace(jb)
    lhs, _ = reduce_measure(meas, LC @ v)
    beta, _ = reduce_measure(meas, jb.dL @ v)
    n = spec.dimension
    return float(abs(lhs - (n - 1) * beta) / (1.0 + abs(beta)))


def beta_inequality_margin(report, samples=100, seed=0):
    """Smallest ``1 - (beta(v)/area)^2 / Gamma3(v, v)`` over random directions.

    Positive means the strict Cauchy-Schwarz bound holds at every sample.
    """
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((samples, report.dimension))
    b = V @ (report.beta / report.area)
    q = np.einsum("mi,ij,mj->m", V, report.Gamma3, V)
    return float(np.min(1.0 - b**2 / q))


@dataclass(frozen=True, eq=False)
class RandersFunctional:
    """``v -> sqrt(v^T M v) + w.v`` with ``M`` the base metric and ``w`` the one-form."""

    base_metric: np.ndarray
    one_form: np.ndarray
    which: str

    @property
    def sup_norm(self):
        return _dual_norm(self.base_metric, self.one_form)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        return np.sqrt(np.einsum("...i,ij,...j->...", v, self.base_metric, v)) + v @ self.one_form

    def to_body_spec(self):
        return BodySpec.randers(self.base_metric, self.one_form)


def make_randers(report, which="F1"):
    """Associated Randers functional built on ``Gamma1`` (``F1``) or ``Gamma3`` (``F3``).

    Raises :class:`NotAFinslerNorm` when the one-form's dual norm is not < 1.
    """
    if which == "F1":
        M, norm = report.Gamma1, report.beta_sup_norm_G1
    elif which == "F3":
        M, norm = report.Gamma3, report.beta_sup_norm_G3
    else:
        raise ValueError("which must be 'F1' or 'F3'")
    if not norm < 1.0:
        raise NotAFinslerNorm(f"{which}: one-form sup norm {norm:.6g} >= 1")
    return RandersFunctional(np.array(M), report.beta / report.area, which)


@dataclass(frozen=True)
class IsometryCheck:
    deviation: float
    beta_deviation: float
    per_gamma: tuple


def isometry_invariance_check(spec, Phi, rule, seed=0, mode="analytic"):
    """How far ``Phi`` is from being orthogonal for ``gamma1..3`` and fixing ``beta``.

    ``Phi`` must preserve the gauge; this is spot-checked at eight random
    points (:class:`NotAnIsometry` otherwise).  ``deviation`` is
    ``max_i |Phi^T gamma_i Phi - gamma_i| / |gamma_i|`` (Frobenius) and
    ``beta_deviation`` is ``|Phi^T beta - beta| / area``.
    """
    Phi = np.asarray(Phi, dtype=float)
    n = spec.dimension
    X = np.random.default_rng(seed).standard_normal((8, n))
    a, b = gauge_values(spec, X), gauge_values(spec, X @ Phi.T)
    if np.any(np.abs(a - b) > 1e-8 * a):
        raise NotAnIsometry("matrix does not preserve the gauge")
    rep = averaged_report(spec, rule, mode=mode)
    devs = tuple(float(np.linalg.norm(Phi.T @ G @ Phi - G) / np.linalg.norm(G))
                 for G in (rep.gamma1, rep.gamma2, rep.gamma3))
    bdev = float(np.linalg.norm(Phi.T @ rep.beta - rep.beta) / rep.area)
    return IsometryCheck(max(devs), bdev, devs)
