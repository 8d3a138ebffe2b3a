import numpy as np
import pytest

import kharmonic as kh


@pytest.fixture(scope="session")
def s2():
    return kh.sphere(2)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_great_circle(n, space=None, dtype=np.float64):
    """Equatorial great circle; odd n is allowed (unlike circle_curve's builder
    this samples directly, which some spectrum tests need)."""
    space = space if space is not None else kh.sphere(2)
    r = space.radius
    a = 2 * np.pi * np.arange(n, dtype=dtype) / n
    pts = np.zeros((n, 3), dtype=dtype)
    pts[:, 0] = r * np.cos(a)
    pts[:, 1] = r * np.sin(a)
    return kh.DiscreteCurve(space, pts, closed=True, h=2 * np.pi * r / n)


@pytest.fixture
def great_circle_64(s2):
    return make_great_circle(64, s2)
