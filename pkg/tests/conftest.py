import numpy as np
import pytest
from hypothesis import strategies as st

from attrlearn.core_model import GameSpec, Prior


def random_prior(rng, K, mu_scale=1.0):
    return Prior(rng.normal(0, mu_scale, K), rng.uniform(0.1, 10.0, K))


def log_uniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def unit2():
    return Prior([0.0, 0.0], [1.0, 1.0])


pos = st.floats(min_value=0.05, max_value=10.0, allow_nan=False)
var = st.floats(min_value=0.1, max_value=10.0, allow_nan=False)
budget = st.floats(min_value=0.01, max_value=100.0, allow_nan=False)


@st.composite
def instances(draw, k_min=2, k_max=6):
    K = draw(st.integers(k_min, k_max))
    alpha = np.array(draw(st.lists(pos, min_size=K, max_size=K)))
    sigma = np.array(draw(st.lists(var, min_size=K, max_size=K)))
    T = draw(budget)
    return alpha, Prior(np.zeros(K), sigma), T


@st.composite
def games(draw, k_min=2, k_max=5):
    K = draw(st.integers(k_min, k_max))
    ar = draw(st.lists(st.floats(0.0, 3.0, allow_subnormal=False), min_size=K, max_size=K))
    ad = draw(st.lists(st.floats(0.0, 5.0, allow_subnormal=False), min_size=K, max_size=K))
    mu = draw(st.lists(st.floats(-2.0, 2.0), min_size=K, max_size=K))
    sig = draw(st.lists(var, min_size=K, max_size=K))
    T = draw(st.floats(0.05, 20.0))
    return GameSpec(Prior(mu, sig), ad, ar, T)


# criterion number -> (title, passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} -- {detail}")
