import numpy as np
import pytest
from hypothesis import settings

from qtexp import LaurentSeries, LowRankCorrection

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def random_symbol(rng, lo=-4, hi=4, norm=None, complex_=False):
    c = rng.standard_normal(hi - lo + 1)
    if complex_:
        c = c + 1j * rng.standard_normal(hi - lo + 1)
    a = LaurentSeries(c, lo)
    if norm is not None:
        a = a * (norm / np.sum(np.abs(a.coeffs)))
    return a


def random_correction(rng, rows=6, cols=5, rank=3, scale=1.0):
    return LowRankCorrection(scale * rng.standard_normal((rows, rank)),
                             rng.standard_normal((cols, rank)))


def rel_inf_error(X, Y):
    return np.abs(X - Y).sum(axis=1).max() / np.abs(Y).sum(axis=1).max()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
