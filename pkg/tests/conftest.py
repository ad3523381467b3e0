import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from shearlab import kernel as K
from shearlab.sampling import random_config, random_isometry, random_twist_scene

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def isometries(draw, spread=1.5):
    return random_isometry(np.random.default_rng(draw(seeds)), spread)


@st.composite
def configs(draw, **kwargs):
    return random_config(np.random.default_rng(draw(seeds)), **kwargs)


@st.composite
def twist_scenes(draw, **kwargs):
    return random_twist_scene(np.random.default_rng(draw(seeds)), **kwargs)


@st.composite
def boundary_values(draw, lo=-5.0, hi=5.0):
    return draw(st.floats(lo, hi, allow_nan=False))


@st.composite
def distinct_points(draw, k, gap=0.05):
    """``k`` boundary values pairwise at least ``gap`` apart."""
    xs = draw(
        st.lists(st.floats(-5.0, 5.0, allow_nan=False), min_size=k, max_size=k).filter(
            lambda v: min(abs(a - b) for i, a in enumerate(v) for b in v[i + 1 :]) > gap
        )
    )
    return xs


def rel(x, ref):
    return abs(x - ref) / abs(ref) if ref != 0 else abs(x)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


E = math.e


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
