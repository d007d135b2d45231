import numpy as np
import pytest
from hypothesis import settings

from dynsheaf.map_core import make_map
from dynsheaf.numerics import Poly
from dynsheaf.numerics.geometry import ProjPoint

settings.register_profile("dynsheaf", max_examples=25, deadline=None)
settings.load_profile("dynsheaf")

INF = ProjPoint.infinity()


def pt(z):
    return INF if z == "inf" else ProjPoint.from_complex(z)


def rmap(P, Q=(1,)):
    """Map from coefficient lists, lowest degree first."""
    return make_map(Poly(list(P)), Poly(list(Q)))


def random_map(rng, d):
    """A generic degree-``d`` rational map with Gaussian coefficients."""
    P = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
    Q = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
    return make_map(Poly(P), Poly(Q))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# verdict lines of the acceptance module, repeated in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
