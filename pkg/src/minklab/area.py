"""The area function of a Funk space and the rigidity diagnostic.

``r(p)`` is the area of the indicatrix of the translated gauge ``L_p``.
Its gradient and Hessian are indicatrix averages of ``dF`` and
``dF (x) dF``:

    dr   = (n - 1) / 2       * int dF          mu_p
    d2r  = (n^2 - 1) / 4     * int dF (x) dF   mu_p
"""

from __future__ import annotations

import csv
import io
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np

from .averaging import averaged_report
from .errors import BoundViolation, DidNotConverge, NotPositiveDefinite
from .funk import INTERIOR_GUARD, FunkContext
from .gauges import BodySpec, batch_jet, gauge_values, q_curvature, sphere_sample
from .quadrature import indicatrix_measure, reduce_measure

GRID_LEVEL = 0.9
BOUND_TOL = 1e-9


@dataclass(frozen=True)
class AreaPoint:
    p: np.ndarray
    value: float
    gradient: np.ndarray
    hessian: np.ndarray


@dataclass(eq=False)
class AreaField:
    """Area function of the Funk space of ``body``, integrated with ``rule``.

    Evaluations are cached per base point; cache access is serialised by a
    lock, so threads may evaluate different points concurrently.
    """

    body: BodySpec
    rule: object
    guard: float = INTERIOR_GUARD
    cache: dict = field(default_factory=dict, repr=False)
    grid: list | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def dimension(self):
        return self.body.dimension

    def evaluate(self, p):
        p = np.asarray(p, dtype=float).reshape(-1)
        key = tuple(p.tolist())
        with self._lock:
            hit = self.cache.get(key)
        if hit is not None:
            return hit
        ctx = FunkContext.create(self.body, p, self.guard)
        meas = indicatrix_measure(ctx.gauge_at_p, self.rule, order=2)
        dF = meas.jets.dL
        n = self.dimension
        r, _ = reduce_measure(meas, np.ones(len(dF)))
        beta, _ = reduce_measure(meas, dF)
        g3, _ = reduce_measure(meas, np.einsum("mi,mj->mij", dF, dF))
        g3 = 0.5 * (g3 + g3.T)
        pt = AreaPoint(p, float(r), 0.5 * (n - 1) * beta, 0.25 * (n * n - 1) * g3)
        with self._lock:
            return self.cache.setdefault(key, pt)

    def r0(self):
        return self.evaluate(np.zeros(self.dimension)).value


def area_value(field, p, path="translated"):
    """``r(p)``, by the translated gauge (default) or pulled back to ``dK``.

    The pulled-back form integrates ``(1 - p.dL)^{-(n-1)/2}`` over the
    indicatrix of the body itself.
    """
    if path == "translated":
        return field.evaluate(p).value
    if path != "pullback":
        raise ValueError("path must be 'translated' or 'pullback'")
    p = np.asarray(p, dtype=float)
    FunkContext.create(field.body, p, field.guard)
    meas = indicatrix_measure(field.body, field.rule, order=2)
    c = 1.0 - meas.jets.dL @ p
    n = field.dimension
    val, _ = reduce_measure(meas, c ** (-0.5 * (n - 1)))
    return float(val)


def area_gradient(field, p):
    """``dr/du^i = (n - 1)/2 int dF/dy^i mu_p``, i.e. ``(n - 1)/2`` times beta of ``K - p``."""
    return field.evaluate(p).gradient


def area_hessian(field, p):
    """``(n^2 - 1)/4`` times gamma3 of ``K - p``.

    Raises :class:`NotPositiveDefinite` if the result is not SPD, which
    can only happen through a numerical fault.
    """
    H = field.evaluate(p).hessian
    if np.linalg.eigvalsh(H)[0] <= 0:
        raise NotPositiveDefinite(f"area Hessian at {p} is not positive definite")
    return H


def _bounds(field, p):
    p = np.asarray(p, dtype=float)
    e = -0.5 * (field.dimension - 1)
    if np.any(p):
        Lp, Lm = gauge_values(field.body, np.array([p, -p]))
    else:
        Lp = Lm = 0.0
    ratio = area_value(field, p) / field.r0()
    return float((1.0 + Lm) ** e), float(ratio), float((1.0 - Lp) ** e)


def _inside(bounds, tol):
    lower, ratio, upper = bounds
    return lower * (1 - tol) <= ratio <= upper * (1 + tol)


def area_bounds_check(field, p, tol=BOUND_TOL):
    """``(lower, r(p)/r(0), upper)`` with the two-sided bound in ``L(p)``, ``L(-p)``.

    Raises :class:`BoundViolation` if the ratio leaves the band by more than
    the relative tolerance ``tol``.
    """
    b = _bounds(field, p)
    if not _inside(b, tol):
        lower, ratio, upper = b
        raise BoundViolation(f"area ratio {ratio:.12g} outside [{lower:.12g}, {upper:.12g}] at p={p}")
    return b


@dataclass(frozen=True)
class MinimizerResult:
    point: np.ndarray
    value: float
    gradient_norm: float
    iterations: int


def minimize_area(field, tol=1e-8, maxiter=100):
    """Damped Newton iteration for the minimiser of ``r``, started at the origin.

    Steps are halved until the trial point is inside ``L <= 1 - guard`` and
    the Armijo condition holds; stops at ``|grad r| <= tol * r``.
    """
    n = field.dimension
    p = np.zeros(n)
    for it in range(maxiter + 1):
        pt = field.evaluate(p)
        gnorm = float(np.linalg.norm(pt.gradient))
        if gnorm <= tol * pt.value:
            return MinimizerResult(p, pt.value, gnorm, it)
        step = -np.linalg.solve(pt.hessian, pt.gradient)
        slope = pt.gradient @ step
        t = 1.0
        for _ in range(60):
            trial = p + t * step
            inside = not np.any(trial) or gauge_values(field.body, trial[None])[0] <= 1 - field.guard
            if inside:
                if gnorm <= 1e-6 * pt.value:
                    break
                if field.evaluate(trial).value <= pt.value + 1e-4 * t * slope:
                    break
            t *= 0.5
        else:
            raise DidNotConverge("line search failed in minimize_area")
        p = trial
    raise DidNotConverge(f"minimize_area did not converge in {maxiter} iterations")


# ---------------------------------------------------------------------------
# grids


def _box(body, level, count=4096):
    n = body.dimension
    if n == 2:
        th = 2 * np.pi * np.arange(count) / count
        U = np.column_stack([np.cos(th), np.sin(th)])
    else:
        U = np.vstack([np.eye(n), -np.eye(n), sphere_sample(n, count)])
    X = level * U / gauge_values(body, U)[:, None]
    return X.min(axis=0), X.max(axis=0)


@dataclass(frozen=True)
class GridRow:
    p: np.ndarray
    value: float
    lower: float
    ratio: float
    upper: float
    min_hessian_eigenvalue: float


def area_grid(field, resolution=21, level=GRID_LEVEL, tol=BOUND_TOL, check=True):
    """Evaluate ``r``, its bounds and Hessian eigenvalue on a lattice in ``{L <= level}``.

    The lattice spans the bounding box of ``level * K`` with ``resolution``
    points per axis; points outside the sublevel set are skipped.  With
    ``check`` every row must pass :func:`area_bounds_check` (else
    :class:`BoundViolation`); without it rows are returned as computed.
    """
    lo, hi = _box(field.body, level)
    axes = [np.linspace(a, b, resolution) for a, b in zip(lo, hi)]
    rows = []
    for idx in np.ndindex(*(resolution,) * field.dimension):
        p = np.array([ax[i] for ax, i in zip(axes, idx)])
        if np.any(p) and gauge_values(field.body, p[None])[0] > level:
            continue
        lower, ratio, upper = area_bounds_check(field, p, tol) if check else _bounds(field, p)
        w = np.linalg.eigvalsh(field.evaluate(p).hessian)[0]
        rows.append(GridRow(p, field.evaluate(p).value, lower, ratio, upper, float(w)))
    field.grid = rows
    return rows


def grid_to_csv(rows, fh=None):
    out = io.StringIO() if fh is None else fh
    n = len(rows[0].p)
    w = csv.writer(out, lineterminator="\n")
    w.writerow([f"p{i + 1}" for i in range(n)] + ["r", "lower", "ratio", "upper", "min_hessian_eig"])
    for row in rows:
        w.writerow([repr(float(c)) for c in row.p]
                   + [repr(float(x)) for x in (row.value, row.lower, row.ratio, row.upper,
                                               row.min_hessian_eigenvalue)])
    return out.getvalue() if fh is None else None


# ---------------------------------------------------------------------------
# rigidity diagnostic


@dataclass(frozen=True)
class BrickellReport:
    dimension: int
    q_norm: float
    balanced: bool
    ellipsoid_residual: float
    fitted_form: np.ndarray
    verdict: str
    warnings: tuple = ()

    def to_dict(self):
        return {
            "dimension": self.dimension,
            "q_norm": self.q_norm,
            "balanced": self.balanced,
            "ellipsoid_residual": self.ellipsoid_residual,
            "fitted_form": self.fitted_form.tolist(),
            "verdict": self.verdict,
            "warnings": list(self.warnings),
        }


def ellipsoid_fit(body, samples=None, seed=0):
    """Least-squares symmetric ``M`` with ``L(v)^2 ~ v^T M v`` on sphere samples.

    Returns ``(M, residual)`` with the residual ``mean(err^2) / mean(L^4)``.
    """
    n = body.dimension
    k = n * (n + 1) // 2
    samples = max(samples or 0, 5 * k)
    U = sphere_sample(n, samples, seed)
    L2 = gauge_values(body, U) ** 2
    iu = np.triu_indices(n)
    design = U[:, iu[0]] * U[:, iu[1]] * np.where(iu[0] == iu[1], 1.0, 2.0)
    coef, *_ = np.linalg.lstsq(design, L2, rcond=None)
    M = np.zeros((n, n))
    M[iu] = coef
    M = M + np.triu(M, 1).T
    err = design @ coef - L2
    return M, float(np.mean(err**2) / np.mean(L2**2))


def brickell_diagnostic(body, rule, samples=200, q_tol=1e-8, residual_tol=1e-10, seed=0):
    """Check flat ``Q`` plus balanced indicatrix against the body being Euclidean.

    ``q_norm`` is the largest entry of ``Q`` over ``samples`` indicatrix
    points.  With ``n >= 3``, ``q_norm <= q_tol`` and a balanced body, the
    verdict is ``"consistent"`` when the ellipsoid fit residual is below
    ``residual_tol`` and ``"counterexample candidate - check numerics"``
    otherwise; when the hypotheses fail it is ``"hypotheses not met"``.  In
    dimension 2 a warning is recorded and the verdict is
    ``"not applicable: dimension < 3"``.
    """
    n = body.dimension
    notes = []
    U = sphere_sample(n, samples, seed)
    U = U / gauge_values(body, U)[:, None]
    Q = q_curvature(batch_jet(body, U, order=3))
    q_norm = float(np.max(np.abs(Q)))
    balanced = averaged_report(body, rule).balanced
    M, resid = ellipsoid_fit(body, seed=seed)
    if n < 3:
        msg = "rigidity needs dimension >= 3; no verdict for n = 2"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
        verdict = "not applicable: dimension < 3"
    elif q_norm <= q_tol and balanced:
        verdict = "consistent" if resid <= residual_tol else "counterexample candidate - check numerics"
    else:
        verdict = "hypotheses not met"
    return BrickellReport(n, q_norm, balanced, resid, M, verdict, tuple(notes))


__all__ = [
    "AreaField", "AreaPoint", "BrickellReport", "GridRow", "MinimizerResult",
    "area_bounds_check", "area_gradient", "area_grid", "area_hessian", "area_value",
    "brickell_diagnostic", "ellipsoid_fit", "grid_to_csv", "minimize_area",
]
