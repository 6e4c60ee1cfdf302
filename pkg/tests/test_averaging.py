import dataclasses
import json

import numpy as np
import pytest

import oracles
from conftest import ANALYTIC_FAMILIES, sample_bodies
from minklab import (
    BodySpec,
    averaged_report,
    beta_inequality_margin,
    build_rule,
    isometry_invariance_check,
    make_randers,
    remark1_identity_residual,
)
from minklab.averaging import _dual_norm
from minklab.errors import NotAFinslerNorm, NotAnIsometry, SingularGamma

TRAP = build_rule(2, "trapezoid2d", 256)
GAUSS = build_rule(3, "gauss_product3d", 32)


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def test_ball_plane():
    rep = averaged_report(BodySpec.ball(2), TRAP)
    assert rep.area == pytest.approx(2 * np.pi, abs=1e-10)
    np.testing.assert_allclose(rep.Gamma1, np.eye(2), atol=1e-10)
    np.testing.assert_allclose(rep.Gamma2, np.eye(2) / 2, atol=1e-10)
    np.testing.assert_allclose(rep.Gamma3, np.eye(2) / 2, atol=1e-10)
    np.testing.assert_allclose(rep.beta, 0.0, atol=1e-10)
    assert rep.balanced


def test_ball_space():
    rep = averaged_report(BodySpec.ball(3), GAUSS)
    np.testing.assert_allclose(rep.Gamma3, np.eye(3) / 3, atol=1e-10)
    np.testing.assert_allclose(rep.Gamma2, 2 * np.eye(3) / 3, atol=1e-10)
    lam, misfit = rep.lambda_estimate()
    assert lam == pytest.approx(2 / 3, abs=1e-10)
    assert misfit <= 1e-12


def test_randers_beta_against_quad_oracle():
    b = np.array([0.3, 0.0])
    rep = averaged_report(BodySpec.randers(np.eye(2), b), TRAP)
    area, beta = oracles.randers_disc_moments(b)
    assert rep.area == pytest.approx(area, rel=1e-12)
    np.testing.assert_allclose(rep.beta, beta, atol=1e-12)
    assert rep.beta[0] > 0
    assert not rep.balanced


@pytest.mark.parametrize("family", ANALYTIC_FAMILIES)
@pytest.mark.parametrize("n", [2, 3])
def test_report_invariants(family, n):
    rep = averaged_report(sample_bodies(n)[family], TRAP if n == 2 else GAUSS)
    np.testing.assert_allclose(rep.gamma1 - rep.gamma2 - rep.gamma3, 0.0, atol=1e-10 * np.abs(rep.gamma1).max())
    for M in (rep.gamma1, rep.gamma2, rep.gamma3):
        np.testing.assert_array_equal(M, M.T)
        assert np.linalg.eigvalsh(M)[0] > 0
    assert rep.beta_sup_norm_G1 < 1 and rep.beta_sup_norm_G3 < 1
    assert beta_inequality_margin(rep) > 0


@pytest.mark.parametrize("family", ANALYTIC_FAMILIES)
def test_node_doubling(family):
    spec = sample_bodies(2)[family]
    a = averaged_report(spec, build_rule(2, "trapezoid2d", 256))
    b = averaged_report(spec, build_rule(2, "trapezoid2d", 512))
    for x, y in ((a.gamma1, b.gamma1), (a.gamma3, b.gamma3), (a.beta, b.beta), (a.area, b.area)):
        np.testing.assert_allclose(x, y, atol=1e-9 * np.abs(y).max() + 1e-15)


def test_sup_norm_matches_sampled_dual_norm():
    rep = averaged_report(sample_bodies(2)["randers"], TRAP)
    th = np.linspace(0, 2 * np.pi, 20001)
    V = np.column_stack([np.cos(th), np.sin(th)])
    q = np.sqrt(np.einsum("mi,ij,mj->m", V, rep.Gamma1, V))
    sampled = np.max(V @ (rep.beta / rep.area) / q)
    assert rep.beta_sup_norm_G1 == pytest.approx(sampled, rel=1e-7)


def test_symmetric_quartic_isotropy():
    # the hyperoctahedral symmetry group acts irreducibly, so gamma2 is a multiple of gamma1
    rep = averaged_report(BodySpec.quartic(np.eye(3), [1.0, 1.0, 1.0], 0.3), GAUSS)
    lam, misfit = rep.lambda_estimate()
    assert 0 < lam < 1
    assert misfit <= 1e-10
    assert rep.balanced


def test_stochastic_rule_reports_errors():
    spec = BodySpec.randers(np.eye(4), [0.2, 0.0, 0.1, 0.0])
    rep = averaged_report(spec, build_rule(4, "qmc", 4096, seed=1))
    assert set(rep.standard_errors) == {"area", "gamma1", "gamma2", "gamma3", "beta"}
    assert np.all(rep.standard_errors["gamma1"] >= 0)
    assert rep.metadata["rule"]["kind"] == "qmc"


def test_serialization():
    rep = averaged_report(sample_bodies(2)["randers"], TRAP)
    doc = json.loads(rep.to_json())
    assert doc["schema_version"] == "1.0"
    assert doc["metadata"]["rule"] == {"kind": "trapezoid2d", "dimension": 2, "node_count": 256, "shape": [256]}
    assert doc["metadata"]["tolerances"]["balance_tolerance"] == 1e-8
    assert np.array(doc["gamma1"]).shape == (2, 2)
    assert doc["body"]["family"] == "randers"
    assert rep.to_json() == averaged_report(sample_bodies(2)["randers"], TRAP).to_json()


# --- Cartan trace identity --------------------------------------------------------


def test_remark1_ellipsoid():
    assert remark1_identity_residual(sample_bodies(2)["ellipsoid"], [1.0, 0.0], TRAP) <= 1e-14


def test_remark1_randers():
    spec = BodySpec.randers(np.eye(2), [0.3, 0.0])
    assert remark1_identity_residual(spec, [1.0, 0.0], build_rule(2, "trapezoid2d", 512)) <= 1e-6


@pytest.mark.parametrize("family", ANALYTIC_FAMILIES)
def test_remark1_all_families(family):
    spec = sample_bodies(3)[family]
    for v in np.random.default_rng(1).standard_normal((3, 3)):
        assert remark1_identity_residual(spec, v, GAUSS) <= 1e-9


def test_remark1_quartic_finite_differences():
    spec = BodySpec.quartic(np.eye(3), [1.0, 2.0, 0.5], 0.2)
    v = np.random.default_rng(4).standard_normal(3)
    assert remark1_identity_residual(spec, v, build_rule(3, "gauss_product3d", 16), mode="finite-difference") <= 1e-4


# --- Randers functionals ------------------------------------------------------------


def test_ball_associated_functionals():
    rep = averaged_report(BodySpec.ball(2), TRAP)
    F1, F3 = make_randers(rep, "F1"), make_randers(rep, "F3")
    V = np.random.default_rng(0).standard_normal((10, 2))
    np.testing.assert_allclose(F1(V), np.linalg.norm(V, axis=1), rtol=1e-10)
    np.testing.assert_allclose(F3(V), np.linalg.norm(V, axis=1) / np.sqrt(2), rtol=1e-10)


@pytest.mark.parametrize("which", ["F1", "F3"])
def test_randers_body_functional(which):
    rep = averaged_report(sample_bodies(3)["randers"], GAUSS)
    F = make_randers(rep, which)
    assert F.sup_norm < 1
    assert F.which == which
    spec = F.to_body_spec()
    assert spec.family == "randers"
    from minklab import gauge_values

    V = np.random.default_rng(3).standard_normal((5, 3))
    np.testing.assert_allclose(gauge_values(spec, V), F(V), rtol=1e-13)


def test_not_a_finsler_norm():
    rep = averaged_report(BodySpec.ball(2), TRAP)
    fake = dataclasses.replace(rep, beta_sup_norm_G3=1.2)
    with pytest.raises(NotAFinslerNorm):
        make_randers(fake, "F3")
    with pytest.raises(ValueError):
        make_randers(rep, "F2")


def test_singular_gamma():
    with pytest.raises(SingularGamma):
        _dual_norm(np.array([[1.0, 0.0], [0.0, -1.0]]), np.ones(2))


# --- isometry invariance -------------------------------------------------------------------


def test_ball_rotation():
    chk = isometry_invariance_check(BodySpec.ball(2), rotation(0.7), TRAP)
    assert chk.deviation <= 1e-10 and chk.beta_deviation <= 1e-10


def test_quartic_reflection():
    spec = BodySpec.quartic(np.eye(2), [1.0, 1.0], 0.5)
    chk = isometry_invariance_check(spec, np.diag([-1.0, 1.0]), TRAP)
    assert chk.deviation <= 1e-8
    assert averaged_report(spec, TRAP).balanced
    assert max(chk.per_gamma) == chk.deviation


def test_ellipse_reflection():
    chk = isometry_invariance_check(BodySpec.ellipsoid(np.diag([1.0, 4.0])), np.diag([-1.0, 1.0]), TRAP)
    assert chk.deviation <= 1e-10


def test_not_an_isometry():
    with pytest.raises(NotAnIsometry):
        isometry_invariance_check(BodySpec.ellipsoid(np.diag([1.0, 4.0])), rotation(0.3), TRAP)
