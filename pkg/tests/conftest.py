import pytest
from hypothesis import HealthCheck, settings

from semirec.space import PhaseSpace
from semirec.semigroup import GeneratorSystem

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

BOX2 = PhaseSpace.box((-2, 2))
UNIT = PhaseSpace.box((0, 1))
CHEB = PhaseSpace.box((-1, 1))
CIRCLE = PhaseSpace.circle()


def make(space, **maps):
    return GeneratorSystem.from_strings(space, list(maps.items()))


@pytest.fixture
def square_half():
    return make(BOX2, g1="x^2", g2="x^2 - 1/2")


@pytest.fixture
def square_cube():
    return make(BOX2, g1="x^2", g2="x^3")


@pytest.fixture
def square():
    return make(BOX2, g1="x^2")


@pytest.fixture
def chebyshev():
    return make(CHEB, T2="2*x^2 - 1", T3="4*x^3 - 3*x")


@pytest.fixture
def rotations():
    return make(CIRCLE, g1="x + 0.35", g2="x + 0.61")


@pytest.fixture
def tent():
    return make(UNIT, t="1 - abs(2*x - 1)")


@pytest.fixture
def logistic():
    return make(UNIT, l="4*x*(1 - x)")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
