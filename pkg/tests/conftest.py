import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from interlacements import build_graph

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DYADIC = st.sampled_from([0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0])


@st.composite
def killed_graphs(draw, max_n=6):
    """Small connected killed graphs with dyadic weights."""
    n = draw(st.integers(1, max_n))
    edges = {}
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges[(u, v)] = draw(DYADIC)
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    for u, v in extra:
        if u != v:
            edges.setdefault((min(u, v), max(u, v)), draw(DYADIC))
    kills = {x: draw(DYADIC) for x in draw(st.sets(st.integers(0, n - 1), min_size=1))}
    loops = {x: draw(DYADIC) for x in draw(st.sets(st.integers(0, n - 1), max_size=2))}
    return build_graph([(u, v, w) for (u, v), w in edges.items()], kills, loops=loops, n=n,
                       name="random")


@st.composite
def graph_with_sets(draw, max_n=6):
    """A graph with nested nonempty vertex sets ``K`` inside ``L``."""
    g = draw(killed_graphs(max_n))
    L = sorted(draw(st.sets(st.integers(0, g.n - 1), min_size=1)))
    K = sorted(draw(st.sets(st.sampled_from(L), min_size=1)))
    return g, K, L


@pytest.fixture
def two_path():
    return build_graph([(0, 1, 1.0)], {0: 1.0, 1: 1.0}, name="two_path")


@pytest.fixture
def single():
    return build_graph([], {0: 1.0}, n=1, name="single")


def close(a, b, tol=1e-12):
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=0, atol=tol)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
