import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from minklab import BodySpec

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def spd(rng, n, spread=3.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q @ np.diag(rng.uniform(1.0, spread, n)) @ q.T


def sample_bodies(n, seed=0):
    """One body of every family in dimension ``n`` (translated wraps a randers)."""
    rng = np.random.default_rng(seed)
    A = spd(rng, n)
    b = rng.standard_normal(n)
    b *= 0.4 / np.sqrt(b @ np.linalg.solve(A, b))
    randers = BodySpec.randers(A, b)
    return {
        "ellipsoid": BodySpec.ellipsoid(A),
        "randers": randers,
        "quartic": BodySpec.quartic(spd(rng, n), rng.uniform(0.2, 1.0, n), 0.3),
        "translated": BodySpec.translated(BodySpec.quartic(np.eye(n), np.ones(n), 0.2), 0.2 * rng.uniform(-1, 1, n)),
        "translated_randers": BodySpec.translated(randers, 0.2 * rng.uniform(-1, 1, n)),
    }


ANALYTIC_FAMILIES = ("ellipsoid", "randers", "quartic", "translated", "translated_randers")


@pytest.fixture(params=[2, 3], ids=["n2", "n3"])
def bodies(request):
    return sample_bodies(request.param)


@st.composite
def body_specs(draw, n=None):
    """Random valid bodies of all families."""
    n = draw(st.sampled_from([2, 3])) if n is None else n
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    A = spd(rng, n, draw(st.floats(1.0, 5.0)))
    family = draw(st.sampled_from(["ellipsoid", "randers", "quartic", "translated"]))
    if family == "ellipsoid":
        return BodySpec.ellipsoid(A)
    if family == "randers":
        b = rng.standard_normal(n)
        b *= draw(st.floats(0.0, 0.8)) / np.sqrt(b @ np.linalg.solve(A, b))
        return BodySpec.randers(A, b)
    if family == "quartic":
        return BodySpec.quartic(A, rng.uniform(0.0, 1.0, n), draw(st.floats(0.0, 2.0)))
    inner = BodySpec.quartic(A, rng.uniform(0.0, 1.0, n), draw(st.floats(0.0, 1.0)))
    u = rng.standard_normal(n)
    from minklab import evaluate_gauge

    shift = draw(st.floats(0.0, 0.6)) * u / evaluate_gauge(inner, u)
    return BodySpec.translated(inner, shift)


def unit_vectors(n):
    return st.lists(st.floats(-1, 1), min_size=n, max_size=n).map(np.array).filter(
        lambda v: np.linalg.norm(v) > 0.1
    )


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.format_line(number))
