"""Command line driver: ``mlab <analyze|funk-checks|area-map|brickell>``.

Every command reads a body document (``--spec``), writes a JSON report with
a top-level ``schema_version`` plus CSV tables into ``--out``, and exits
with

    0  all checks within tolerance
    1  a check failed
    2  bad body document or configuration
    3  quadrature / linear algebra failure

Outputs carry no timestamps, so a fixed seed gives byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .area import AreaField, area_grid, brickell_diagnostic, grid_to_csv, minimize_area
from .averaging import SCHEMA_VERSION, averaged_report
from .errors import (
    DegenerateHessian,
    InvalidSpec,
    MinkLabError,
    QuadratureFailure,
    SingularGamma,
    SingularMetric,
    UnsupportedKind,
)
from .funk import (
    FunkContext,
    conformal_factor_check,
    curvature_closed_form,
    curvature_commutator,
    okada_residual,
)
from .gauges import BodySpec, gauge_values, validate_spec
from .quadrature import build_rule, verify_jacobian_lemma

EXIT_OK, EXIT_CHECK, EXIT_SPEC, EXIT_QUADRATURE = 0, 1, 2, 3

DEFAULT_TOLERANCES = {
    "analyze": {"balance": 1e-8, "lambda_misfit": 1e-6},
    "funk-checks": {"okada": 1e-6, "conformal": 1e-6, "curvature": 1e-4, "lemma1": 1e-6},
    "area-map": {"bound": 1e-9, "gradient": 1e-8},
    "brickell": {"q_norm": 1e-8, "residual": 1e-10},
}
DEFAULT_SAMPLES = {"funk-checks": 20, "brickell": 200}
FUNK_LEVEL = 0.9


class ConfigError(Exception):
    """Bad command line configuration (mapped to exit code 2)."""


@dataclass
class RunConfig:
    command: str
    spec_path: Path
    body: BodySpec
    rule_kind: str
    nodes: object
    seed: int = 0
    out: Path = Path(".")
    grid: int = 21
    samples: int = 0
    tolerances: dict = field(default_factory=dict)
    overrides: dict = field(default_factory=dict)

    def rule(self):
        return build_rule(self.body.dimension, self.rule_kind, self.nodes, self.seed)

    def metadata(self, rule=None):
        meta = {
            "command": self.command,
            "spec_file": self.spec_path.name,
            "body": self.body.to_dict(),
            "seed": self.seed,
            "tolerances": dict(self.tolerances),
            "tolerance_overrides": dict(self.overrides),
        }
        if rule is not None:
            meta["rule"] = rule.descriptor()
        return meta


def _default_rule(n):
    if n == 2:
        return "trapezoid2d", 256
    if n == 3:
        return "gauss_product3d", (32, 64)
    return "qmc", 4096


def _parse_nodes(text):
    if text is None:
        return None
    try:
        if "x" in text.lower():
            a, b = text.lower().split("x")
            return int(a), int(b)
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"--nodes must be an integer or AxB, got {text!r}") from exc


def _parse_tolerances(command, items):
    tol = dict(DEFAULT_TOLERANCES[command])
    overrides = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        if name not in tol:
            raise ConfigError(f"unknown tolerance {name!r} for {command}; known: {sorted(tol)}")
        try:
            v = float(value)
        except ValueError as exc:
            raise ConfigError(f"tolerance {name} is not a number: {value!r}") from exc
        if not (v > 0 and np.isfinite(v)):
            raise ConfigError(f"tolerance {name} must be positive, got {v}")
        tol[name] = v
        overrides[name] = v
    return tol, overrides


def _load_body(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidSpec(f"cannot read spec file {path}: {exc}") from exc
    return BodySpec.from_json(text)


def make_config(args):
    body = _load_body(args.spec)
    kind, nodes = _default_rule(body.dimension)
    if args.rule is not None:
        kind = args.rule
        nodes = None
    if args.nodes is not None:
        nodes = _parse_nodes(args.nodes)
    if nodes is None:
        raise ConfigError("--nodes is required when --rule is given")
    tol, overrides = _parse_tolerances(args.command, args.tol)
    if args.grid < 2:
        raise ConfigError("--grid must be >= 2")
    samples = args.samples if args.samples is not None else DEFAULT_SAMPLES.get(args.command, 0)
    if args.command in DEFAULT_SAMPLES and samples < 1:
        raise ConfigError("--samples must be >= 1")
    return RunConfig(args.command, Path(args.spec), body, kind, nodes, args.seed,
                     Path(args.out), args.grid, samples, tol, overrides)


# ---------------------------------------------------------------------------
# output helpers


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def _dump(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n")


def _fmt(x):
    return repr(float(x))


def _matrix_lines(name, M):
    rows = np.atleast_2d(M)
    lines = [f"{name}:"]
    lines += ["  " + " ".join(f"{v: .12e}" for v in r) for r in rows]
    return lines


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(cfg):
    rule = cfg.rule()
    valid = validate_spec(cfg.body, seed=cfg.seed)
    rep = averaged_report(cfg.body, rule, balance_tolerance=cfg.tolerances["balance"])
    lam, misfit = rep.lambda_estimate()
    doc = rep.to_dict()
    doc["metadata"] = cfg.metadata(rule)
    doc["validation"] = {
        "passed": valid.passed,
        "samples": valid.samples,
        "min_eigenvalue": valid.min_eigenvalue,
        "min_eigen_ratio": valid.min_eigen_ratio,
        "failures": [[c, None if p is None else list(p), d] for c, p, d in valid.failures],
    }
    doc["passed"] = bool(valid.passed)
    _dump(cfg.out / "report.json", doc)

    lines = [f"area: {rep.area!r}"]
    for name, M in (("Gamma1", rep.Gamma1), ("Gamma2", rep.Gamma2), ("Gamma3", rep.Gamma3)):
        lines += _matrix_lines(name, M)
    lines += _matrix_lines("beta", rep.beta)
    lines.append(f"balanced: {'true' if rep.balanced else 'false'}")
    if misfit <= cfg.tolerances["lambda_misfit"]:
        lines.append(f"lambda: {lam!r} (gamma2 = lambda gamma1, misfit {misfit:.3e})")
    else:
        lines.append(f"lambda: none (gamma2 is not a multiple of gamma1, misfit {misfit:.3e})")
    lines.append(f"beta_sup_norm_G1: {rep.beta_sup_norm_G1!r}")
    lines.append(f"beta_sup_norm_G3: {rep.beta_sup_norm_G3!r}")
    lines.append(f"validation: {'passed' if valid.passed else 'FAILED'} "
                 f"({valid.samples} samples, {len(valid.failures)} failures)")
    text = "\n".join(lines) + "\n"
    (cfg.out / "summary.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if valid.passed else EXIT_CHECK


def _funk_samples(body, count, seed):
    """Base points with ``L(p) <= 0.9`` and tangent vectors, drawn from ``seed``."""
    n = body.dimension
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((count, n))
    U /= gauge_values(body, U)[:, None]
    P = (FUNK_LEVEL * rng.uniform(size=count))[:, None] * U
    V, X, Y = (rng.standard_normal((count, n)) for _ in range(3))
    return P, V, X, Y


def cmd_funk_checks(cfg):
    body = cfg.body
    n = body.dimension
    P, V, X, Y = _funk_samples(body, cfg.samples, cfg.seed)
    names = ("okada", "conformal", "curvature", "lemma1")
    rows = []
    for k in range(cfg.samples):
        ctx = FunkContext.create(body, P[k])
        F, dF = ctx.derivs(V[k], 1)
        ok = np.max(np.abs(okada_residual(body, ctx, V[k]))) / max(1.0, F * np.max(np.abs(dF)))
        factor, conf = conformal_factor_check(body, ctx, V[k])
        c0 = curvature_closed_form(body, ctx, V[k], X[k], Y[k])
        c1 = curvature_commutator(body, ctx, V[k], X[k], Y[k])
        curv = np.max(np.abs(c1 - c0)) / (1.0 + np.max(np.abs(c0)))
        lem = verify_jacobian_lemma(body, V[k])
        rows.append((P[k], V[k], F, factor, {"okada": ok, "conformal": conf,
                                             "curvature": curv, "lemma1": lem}))
    maxima = {c: max(r[4][c] for r in rows) for c in names}
    min_factor = min(r[3] for r in rows)
    passed = {c: bool(maxima[c] <= cfg.tolerances[c]) for c in names}
    passed["factor_positive"] = bool(min_factor > 0)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = (["sample"] + [f"p{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)]
              + ["F", "conformal_factor"] + [f"{c}_residual" for c in names])
    w.writerow(header)
    for k, (p, v, F, factor, res) in enumerate(rows):
        w.writerow([k] + [_fmt(x) for x in p] + [_fmt(x) for x in v] + [_fmt(F), _fmt(factor)]
                   + [_fmt(res[c]) for c in names])
    w.writerow(["max"] + [""] * (2 * n + 2) + [_fmt(maxima[c]) for c in names])
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "funk_checks.csv").write_text(buf.getvalue())

    ok = all(passed.values())
    _dump(cfg.out / "funk_checks.json", {
        "schema_version": SCHEMA_VERSION,
        "metadata": cfg.metadata() | {"samples": cfg.samples, "level": FUNK_LEVEL},
        "maxima": maxima,
        "min_conformal_factor": min_factor,
        "checks": passed,
        "passed": ok,
    })
    for c in names:
        print(f"{c:10s} max {maxima[c]:.3e}  tol {cfg.tolerances[c]:.1e}  "
              f"{'ok' if passed[c] else 'FAIL'}")
    print(f"conformal factor min {min_factor:.6g}  {'ok' if passed['factor_positive'] else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_area_map(cfg):
    rule = cfg.rule()
    fld = AreaField(cfg.body, rule)
    rows = area_grid(fld, cfg.grid, tol=cfg.tolerances["bound"], check=False)
    tol = cfg.tolerances["bound"]
    inside = [r.lower * (1 - tol) <= r.ratio <= r.upper * (1 + tol) for r in rows]
    eig = [r.min_hessian_eigenvalue for r in rows]
    best = min(rows, key=lambda r: r.value)
    mres = minimize_area(fld, tol=cfg.tolerances["gradient"])
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "area_grid.csv").write_text(grid_to_csv(rows))
    checks = {"bounds": all(inside), "convex": bool(min(eig) > 0),
              "minimizer_converged": bool(mres.gradient_norm <= cfg.tolerances["gradient"] * mres.value)}
    ok = all(checks.values())
    _dump(cfg.out / "area_map.json", {
        "schema_version": SCHEMA_VERSION,
        "metadata": cfg.metadata(rule) | {"grid": cfg.grid, "level": 0.9},
        "grid_points": len(rows),
        "bounds": {"verdict": "all rows inside the bound band" if checks["bounds"]
                   else "bound violated", "violations": int(len(rows) - sum(inside))},
        "min_hessian_eigenvalue": min(eig),
        "grid_minimum": {"point": best.p, "value": best.value},
        "minimizer": {"point": mres.point, "value": mres.value,
                      "gradient_norm": mres.gradient_norm, "iterations": mres.iterations},
        "checks": checks,
        "passed": ok,
    })
    print(f"{len(rows)} grid points, bounds {'ok' if checks['bounds'] else 'VIOLATED'}, "
          f"min Hessian eigenvalue {min(eig):.6g}")
    print(f"minimizer {np.array2string(mres.point, precision=10)} r = {mres.value:.12g}")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_brickell(cfg):
    rule = cfg.rule()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = brickell_diagnostic(cfg.body, rule, samples=cfg.samples, q_tol=cfg.tolerances["q_norm"],
                                  residual_tol=cfg.tolerances["residual"], seed=cfg.seed)
    for wmsg in caught:
        print(f"warning: {wmsg.message}", file=sys.stderr)
    doc = {"schema_version": SCHEMA_VERSION,
           "metadata": cfg.metadata(rule) | {"samples": cfg.samples}}
    doc.update(rep.to_dict())
    if cfg.body.dimension < 3:
        doc["verdict"] = None
    ok = rep.verdict != "counterexample candidate - check numerics"
    doc["passed"] = ok
    _dump(cfg.out / "brickell.json", doc)
    print(f"q_norm {rep.q_norm:.6e}  balanced {rep.balanced}  "
          f"ellipsoid residual {rep.ellipsoid_residual:.3e}")
    print(f"verdict: {doc['verdict'] if doc['verdict'] is not None else 'none'}")
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {
    "analyze": cmd_analyze,
    "funk-checks": cmd_funk_checks,
    "area-map": cmd_area_map,
    "brickell": cmd_brickell,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="mlab", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--spec", required=True, help="body document (JSON)")
        sp.add_argument("--rule", choices=("trapezoid2d", "gauss_product3d", "montecarlo", "qmc"))
        sp.add_argument("--nodes", help="node count, or THETAxPHI for gauss_product3d")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=".")
        sp.add_argument("--grid", type=int, default=21, help="area-map points per axis")
        sp.add_argument("--samples", type=int, help="sample count for funk-checks / brickell")
        sp.add_argument("--tol", action="append", metavar="NAME=VAL", help="tolerance override")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[args.command](cfg)
    except (InvalidSpec, ConfigError) as exc:
        print(f"mlab: bad configuration: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (QuadratureFailure, UnsupportedKind, SingularGamma, SingularMetric,
            DegenerateHessian) as exc:
        print(f"mlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except MinkLabError as exc:
        print(f"mlab: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ValueError as exc:
        print(f"mlab: bad configuration: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
