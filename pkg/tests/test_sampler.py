import math

import numpy as np
import pytest

from interlacements import (RngStream, build_graph, extend_window, make_biased_z, make_regular_tree,
                            restrict_window, sample_levels, sample_window)
from interlacements import potential as pot
from interlacements import sampler as smp


def test_rng_stream_reproducible_and_split():
    a, b = RngStream(5, (1, 2)), RngStream(5, (1, 2))
    assert [a.uniform() for _ in range(5)] == [b.uniform() for _ in range(5)]
    c = RngStream(5, (1, 3))
    assert RngStream(5, (1, 2)).uniform() != c.uniform()
    s0, s1 = RngStream(5).split(0), RngStream(5).split(1)
    assert s0.uniform() != s1.uniform()
    assert RngStream(5).split(0).uniform() == RngStream(5).split(0).uniform()


def test_rng_poisson_mean():
    r = RngStream(2)
    n = 20000
    for lam in (0.7, 40.0):
        m = sum(r.poisson(lam) for _ in range(n)) / n
        assert abs(m - lam) <= 4 * math.sqrt(lam / n)


def test_no_return_first_step_two_path(two_path):
    step = smp.no_return_first_step(two_path, [0], 0)
    assert step[pot.GHOST] == pytest.approx(2 / 3, abs=1e-12)
    assert step[1] == pytest.approx(1 / 3, abs=1e-12)
    assert smp.no_return_first_step(two_path, [0, 1], 0) == {pot.GHOST: 1.0}


def test_no_return_walk_never_returns():
    g, _ = make_biased_z(4)
    K = [g.index(i) for i in (-1, 0, 1)]
    rng = RngStream(3)
    for _ in range(300):
        path = smp.sample_no_return(g, K, g.index(1), rng)
        assert path.vertices[0] == g.index(1)
        assert not any(v in K for v in path.vertices[1:])
        assert path.end in ("-", "+")
    # the origin is interior to K and cannot escape without returning
    with pytest.raises(Exception, match="undefined"):
        smp.sample_no_return(g, K, g.index(0), rng)


def test_window_sample_structure():
    t = make_regular_tree(2, 3)
    K = [0, 1, 2]
    rng = RngStream(9)
    inK = np.zeros(t.n, dtype=bool)
    inK[K] = True
    for _ in range(200):
        w = sample_window(t, K, rng)
        for tr in w.trajectories:
            assert inK[tr.entry]
            assert tr.backward[0] == tr.forward[0]
            # entry is the first visit: the backward leg stays outside K after its start
            assert not any(inK[v] for v in tr.backward[1:])
            seq = tr.timeline()
            assert all(t.has_edge(a, b) or a == b for a, b in zip(seq, seq[1:]))
        assert np.array_equal(w.indicator, (w.traj_count > 0).astype(np.int8))
        assert np.all(w.visit_count >= w.traj_count)


def test_occupation_fields_count_entry_once():
    tr = smp.LabeledTrajectory((1, 2), (1, 0, 1))
    ind, tc, vc = smp.occupation_fields(np.array([0, 1]), [tr], 3)
    assert tc.tolist() == [1, 1]
    assert vc.tolist() == [1, 2]


def test_reanchor_and_hinge_couple():
    tr = smp.LabeledTrajectory((3, 4, 5), (3, 2, 6, 2, 7))
    inS = np.zeros(8, dtype=bool)
    inS[[2, 4]] = True
    r = tr.reanchor(inS)
    assert r.entry == 4 and r.timeline() == tr.timeline()
    assert tr.hinge_couple(inS) == (4, 2)
    inS[:] = False
    assert tr.reanchor(inS) is None and tr.hinge_couple(inS) is None


def test_restrict_drops_misses():
    g, _ = make_biased_z(3)
    L = [g.index(i) for i in range(-2, 3)]
    K = [g.index(2)]
    rng = RngStream(4)
    for _ in range(100):
        w = sample_window(g, L, rng)
        r = restrict_window(g, w, K)
        assert len(r) <= len(w)
        assert all(tr.entry == K[0] for tr in r.trajectories)


def test_extend_requires_subset(two_path):
    rng = RngStream(1)
    w = sample_window(two_path, [0], rng)
    with pytest.raises(Exception):
        extend_window(two_path, [0, 1], [0], w, rng)
    wl = extend_window(two_path, [0], [0, 1], w, rng)
    assert len(wl) >= len(w)


def test_levels_monotone_and_validation(two_path):
    rng = RngStream(8)
    for _ in range(200):
        d = sample_levels(two_path, [0, 1], (0.5, 1.0, 2.0), rng)
        assert np.all(d[0.5].indicator <= d[1.0].indicator)
        assert np.all(d[1.0].indicator <= d[2.0].indicator)
    with pytest.raises(ValueError):
        sample_levels(two_path, [0], (2.0, 1.0), rng)


def test_bridge_ends_at_target():
    t = make_regular_tree(2, 3)
    K = [0, 1, 2]
    rng = RngStream(6)
    assert smp.bridge_acceptance(t, K, 0, 1) > 0
    for _ in range(20):
        p = smp.sample_bridge(t, K, 0, 1, rng)
        assert p.vertices[0] == 0 and p.vertices[-1] == 1


def test_step_budget_raises(two_path):
    old = smp.SAMPLER_CONFIG["step_budget"]
    g = build_graph([(0, 1, 1000.0)], {0: 1e-3}, name="sticky")
    smp.SAMPLER_CONFIG["step_budget"] = 5
    try:
        with pytest.raises(smp.RunawayError):
            for _ in range(50):
                smp.sample_forward(g, 0, RngStream(0))
    finally:
        smp.SAMPLER_CONFIG["step_budget"] = old


def test_dumps_trajectories_format(two_path):
    w = sample_levels(two_path, [0], (1.0,), RngStream(3))[1.0]
    text = smp.dumps_trajectories(w)
    assert text.count("\n") == len(w)
    for line in text.splitlines():
        mark, rest = line.split(" ", 1)
        assert 0 <= float(mark) <= 1
        assert rest.count("|") == 2
