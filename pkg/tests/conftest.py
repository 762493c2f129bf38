import math
import sys

import numpy as np
import pytest

from planarindex import CoeffPath, TrigPoly

TWO_PI = 2.0 * math.pi


def random_trig_system(rng: np.random.Generator, harmonics: int = 2) -> CoeffPath:
    """A smooth symmetric S(t) with a few Fourier modes and a random period."""
    T = float(rng.uniform(1.0, 7.0))

    def entry(mean_lo, mean_hi):
        cos = [rng.uniform(mean_lo, mean_hi)] + list(rng.uniform(-0.8, 0.8, harmonics))
        sin = [0.0] + list(rng.uniform(-0.8, 0.8, harmonics))
        return TrigPoly(T, tuple(cos), tuple(sin))

    return CoeffPath(T, entry(-0.5, 3.0), entry(-0.5, 0.5), entry(0.0, 2.5))


def battery(n: int, seed: int) -> list[CoeffPath]:
    rng = np.random.default_rng(seed)
    return [random_trig_system(rng) for _ in range(n)]


def rotation_system(T: float, omega: float = 1.0) -> CoeffPath:
    return CoeffPath.constant(omega, 0.0, omega, T)


def saddle_system(T: float) -> CoeffPath:
    return CoeffPath.constant(-1.0, 0.0, 1.0, T)


def zero_system(T: float = 1.0) -> CoeffPath:
    return CoeffPath.constant(0.0, 0.0, 0.0, T)


@pytest.fixture(scope="session")
def saturating():
    from planarindex.catalog import make_saturating_scalar

    T = TWO_PI
    return make_saturating_scalar(TrigPoly(T, (9.0, 2.7)), T)


@pytest.fixture(scope="session")
def lotka():
    from planarindex.catalog import make_lotka_volterra_log

    T = TWO_PI
    coef = TrigPoly(T, (1.0, 0.5))
    return make_lotka_volterra_log(coef, coef, T)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
