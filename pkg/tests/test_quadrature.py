import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import ANALYTIC_FAMILIES, sample_bodies
from minklab import (
    BodySpec,
    build_rule,
    integrate_indicatrix,
    sphere_area,
    verify_divergence_identity,
    verify_jacobian_lemma,
)
from minklab.errors import NonFiniteIntegrand, NotZeroHomogeneous, UnsupportedKind, ZeroVector
from minklab.quadrature import rule_to_csv

BALL2 = BodySpec.ball(2)
TRAP = build_rule(2, "trapezoid2d", 256)


def u1_squared(U):
    return U[:, 0] ** 2 / np.einsum("mi,mi->m", U, U)


# --- build_rule ----------------------------------------------------------------------


def test_trapezoid_four_nodes():
    r = build_rule(2, "trapezoid2d", 4)
    ang = np.mod(np.arctan2(r.nodes[:, 1], r.nodes[:, 0]), 2 * np.pi)
    np.testing.assert_allclose(ang, [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-15)
    np.testing.assert_allclose(r.weights, np.pi / 2, atol=1e-15)
    assert r.node_count == 4 and r.kind == "trapezoid2d"


def test_gauss_product_weights():
    r = build_rule(3, "gauss_product3d", (16, 32))
    assert r.node_count == 512
    assert abs(r.weights.sum() - 4 * np.pi) <= 1e-12
    assert np.all(r.weights > 0)
    np.testing.assert_allclose(np.linalg.norm(r.nodes, axis=1), 1.0, atol=1e-14)


def test_gauss_integer_node_count_doubles_azimuth():
    assert build_rule(3, "gauss_product3d", 16).shape == (16, 32)


def test_montecarlo_four_dimensions():
    r = build_rule(4, "montecarlo", 100_000, seed=1)
    assert r.weights.sum() == pytest.approx(2 * np.pi**2, rel=1e-13)
    assert np.all(r.weights == r.weights[0])
    np.testing.assert_allclose(np.linalg.norm(r.nodes, axis=1), 1.0, atol=1e-14)


@pytest.mark.parametrize("kind", ["montecarlo", "qmc"])
def test_stochastic_rules_are_seeded(kind):
    a, b = build_rule(3, kind, 64, seed=5), build_rule(3, kind, 64, seed=5)
    np.testing.assert_array_equal(a.nodes, b.nodes)
    assert not np.array_equal(a.nodes, build_rule(3, kind, 64, seed=6).nodes)
    assert a.stochastic


@pytest.mark.parametrize("n", [2, 3, 4, 5, 7])
def test_sphere_area_closed_form(n):
    from math import gamma, pi

    assert sphere_area(n) == pytest.approx(2 * pi ** (n / 2) / gamma(n / 2), rel=1e-14)


@pytest.mark.parametrize("n, kind", [(3, "trapezoid2d"), (2, "gauss_product3d"), (2, "lebedev"), (1, "montecarlo")])
def test_unsupported_kinds(n, kind):
    with pytest.raises(UnsupportedKind):
        build_rule(n, kind, 16)


def test_too_few_nodes():
    with pytest.raises(ValueError):
        build_rule(2, "trapezoid2d", 3)
    with pytest.raises(ValueError):
        build_rule(4, "qmc", 2)


def test_rule_csv_export():
    r = build_rule(2, "trapezoid2d", 8)
    text = rule_to_csv(r)
    rows = text.strip().split("\n")
    assert rows[0] == "x1,x2,weight"
    data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, :2], r.nodes)
    np.testing.assert_array_equal(data[:, 2], r.weights)


def test_rule_arrays_are_read_only():
    r = build_rule(2, "trapezoid2d", 8)
    with pytest.raises(ValueError):
        r.weights[0] = 1.0


# --- integrate_indicatrix -------------------------------------------------------


def test_ball_area():
    res = integrate_indicatrix(BALL2, None, TRAP)
    assert res.value == pytest.approx(2 * np.pi, abs=1e-12)
    assert res.standard_error == 0.0
    assert res.rule_used["kind"] == "trapezoid2d"


def test_ellipse_area_against_parametric_oracle():
    spec = BodySpec.ellipsoid(np.diag([4.0, 1.0]))
    oracle = oracles.ellipse_mu_area_oracle(4.0, 1.0)
    assert integrate_indicatrix(spec, None, TRAP).value == pytest.approx(oracle, rel=1e-12)


def test_ellipsoid_area_is_sphere_area():
    # a linear image of the ball carries the same metric volume form
    A = sample_bodies(3)["ellipsoid"].params["A"]
    rule = build_rule(3, "gauss_product3d", 32)
    value = integrate_indicatrix(BodySpec.ellipsoid(A), None, rule).value
    assert value == pytest.approx(4 * np.pi, rel=1e-10)


def test_ball_cos_squared():
    assert integrate_indicatrix(BALL2, u1_squared, TRAP).value == pytest.approx(np.pi, abs=1e-12)


def test_non_finite_integrand():
    with pytest.raises(NonFiniteIntegrand):
        integrate_indicatrix(BALL2, lambda U: np.full(len(U), np.nan), TRAP)


def test_inhomogeneous_integrand_rejected():
    with pytest.raises(NotZeroHomogeneous):
        integrate_indicatrix(BALL2, lambda U: np.linalg.norm(U, axis=1), TRAP)


def test_rule_dimension_mismatch():
    with pytest.raises(ValueError):
        integrate_indicatrix(BodySpec.ball(3), None, TRAP)


def test_tensor_valued_field():
    res = integrate_indicatrix(BALL2, lambda U: np.einsum("mi,mj->mij", U, U) / np.einsum("mi,mi->m", U, U)[:, None, None], TRAP)
    np.testing.assert_allclose(res.value, np.pi * np.eye(2), atol=1e-12)


def test_deterministic_summation_order():
    spec = sample_bodies(2)["quartic"]
    a = integrate_indicatrix(spec, u1_squared, TRAP).value
    b = integrate_indicatrix(spec, u1_squared, TRAP).value
    assert a == b


@pytest.mark.parametrize("family", ANALYTIC_FAMILIES)
def test_trapezoid_spectral_convergence(family):
    spec = sample_bodies(2)[family]
    a = integrate_indicatrix(spec, None, build_rule(2, "trapezoid2d", 128)).value
    b = integrate_indicatrix(spec, None, build_rule(2, "trapezoid2d", 256)).value
    assert abs(a - b) <= 1e-10 * abs(b)


RULES = {
    "trapezoid2d": build_rule(2, "trapezoid2d", 64),
    "gauss_product3d": build_rule(3, "gauss_product3d", 8),
    "montecarlo": build_rule(3, "montecarlo", 200, seed=2),
    "qmc": build_rule(4, "qmc", 256, seed=2),
}


@given(st.sampled_from(sorted(RULES)), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 1000))
def test_linearity(kind, a, b, seed):
    rule = RULES[kind]
    n = rule.dimension
    spec = sample_bodies(n)["quartic"] if n < 4 else BodySpec.randers(np.eye(4), [0.1, 0.2, 0.0, -0.1])
    rng = np.random.default_rng(seed)
    c1, c2 = rng.standard_normal(n), rng.standard_normal(n)

    def f1(U):
        return (U @ c1) ** 2 / np.einsum("mi,mi->m", U, U)

    def f2(U):
        return np.tanh(U @ c2 / np.linalg.norm(U, axis=1))

    lhs = integrate_indicatrix(spec, lambda U: a * f1(U) + b * f2(U), rule).value
    rhs = a * integrate_indicatrix(spec, f1, rule).value + b * integrate_indicatrix(spec, f2, rule).value
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_montecarlo_error_shrinks_like_inverse_sqrt():
    spec = sample_bodies(3)["ellipsoid"]
    exact = 4 * np.pi

    def rms(N):
        errs = [integrate_indicatrix(spec, None, build_rule(3, "montecarlo", N, seed=s)).value - exact
                for s in range(20)]
        return np.sqrt(np.mean(np.square(errs)))

    assert rms(500) / rms(2000) >= 2.0 / 1.5


def test_montecarlo_standard_error_is_calibrated():
    spec = sample_bodies(3)["ellipsoid"]
    res = [integrate_indicatrix(spec, None, build_rule(3, "montecarlo", 2000, seed=s)) for s in range(20)]
    se = np.mean([r.standard_error for r in res])
    spread = np.std([r.value for r in res], ddof=1)
    assert se > 0
    assert 0.5 < se / spread < 2.0


# --- Jacobian lemma ------------------------------------------------------------------


def test_jacobian_ball():
    assert verify_jacobian_lemma(BALL2, [0.3, -0.8]) <= 1e-10


def test_jacobian_ellipse_on_axis():
    assert verify_jacobian_lemma(BodySpec.ellipsoid(np.diag([4.0, 1.0])), [1.0, 0.0]) <= 1e-6


@pytest.mark.parametrize("family", ANALYTIC_FAMILIES)
def test_jacobian_random_points(family):
    spec = sample_bodies(3)[family]
    rng = np.random.default_rng(7)
    for v in rng.standard_normal((10, 3)):
        assert verify_jacobian_lemma(spec, v) <= 1e-6


def test_jacobian_zero_vector():
    with pytest.raises(ZeroVector):
        verify_jacobian_lemma(BALL2, [0.0, 0.0])


# --- divergence identity --------------------------------------------------------------


def test_divergence_ball_area():
    lhs, rhs = verify_divergence_identity(BALL2, None, TRAP)
    assert lhs == pytest.approx(np.pi, abs=1e-12)
    assert rhs == pytest.approx(np.pi, abs=1e-12)


def test_divergence_ball_cos_squared():
    lhs, rhs = verify_divergence_identity(BALL2, u1_squared, TRAP)
    assert lhs == pytest.approx(np.pi / 2, abs=1e-12)
    assert rhs == pytest.approx(np.pi / 2, abs=1e-12)


@pytest.mark.parametrize("family", ["ellipsoid", "randers", "quartic"])
def test_divergence_self_consistency(family):
    spec = sample_bodies(2)[family]
    lhs, rhs = verify_divergence_identity(spec, None, build_rule(2, "trapezoid2d", 512))
    assert abs(lhs - rhs) <= 1e-8 * abs(rhs)
