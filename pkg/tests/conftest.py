import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fdatest.fspace import Grid, PairedDiffSample, make_grid

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def samples(draw, n_min=2, n_max=8, m_min=2, m_max=12, uneven=False):
    """Random difference samples on a (possibly non-equispaced) grid."""
    n = draw(st.integers(n_min, n_max))
    m = draw(st.integers(m_min, m_max))
    if uneven:
        gaps = draw(arrays(float, m - 1, elements=st.floats(0.05, 1.0)))
        grid = Grid.from_points(np.concatenate([[0.0], np.cumsum(gaps)]))
    else:
        grid = make_grid(0.0, 1.0, m)
    seed = draw(st.integers(0, 2**31 - 1))
    values = np.random.default_rng(seed).standard_normal((n, m))
    return PairedDiffSample(grid, values)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid250():
    return make_grid(0.0, 1.0, 250)
