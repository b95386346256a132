import numpy as np
import pytest

from arithdyn import MonicPoly, sample


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_pair(rng, d, X, centered_first=True):
    f = sample(d, X, rng, centered=centered_first)
    g = sample(d, X, rng)
    while g == f:
        g = sample(d, X, rng)
    return f, g


def poly(text: str) -> MonicPoly:
    return MonicPoly.from_text(text)
