import math

import numpy as np
import pytest

from interlacements import harness as hs
from interlacements import make_biased_z


def test_chi_square_pools_small_cells():
    probs = {0: 0.9, 1: 0.05, 2: 0.03, 3: 0.02}
    r = hs.chi_square({0: 90, 1: 5, 2: 3, 3: 2}, probs)
    assert r["merged"] >= 2 and r["p"] > 0.5
    assert hs.chi_square({0: 50, 9: 1}, {0: 1.0})["p"] == 0.0


def test_stat_report_text_is_complete():
    r = hs.StatReport("x", 0.5, 0.1, 0.4, "src", 1.0, True, 4.0, "two-sided", 10, 3, 0.01, {"k": 1})
    text = r.to_text()
    for key in ("estimate", "stderr", "reference", "reference_source", "z", "passed",
                "multiplier", "samples", "seed", "wall_time", "extra.k"):
        assert f"{key} = " in text
    assert text.splitlines()[-1].startswith("wall_time")


def test_vacancy_test_passes_and_is_deterministic(two_path):
    a = hs.vacancy_test(two_path, [0], 4000, seed=5)
    b = hs.vacancy_test(two_path, [0], 4000, seed=5)
    assert a.passed and a.reference == pytest.approx(math.exp(-1.5))
    assert a.estimate == b.estimate


def test_vacancy_test_detects_wrong_reference(two_path, monkeypatch):
    # a capacity off by 20% must be rejected at this sample size
    real = hs.pot.capacity
    monkeypatch.setattr(hs.pot, "capacity", lambda g, K: 1.2 * real(g, K))
    assert not hs.vacancy_test(two_path, [0], 20000, seed=5).passed


def test_fkg_rejects_non_catalog(two_path):
    class Weird(hs.Functional):
        name = "weird"
    with pytest.raises(TypeError):
        hs.fkg_test(two_path, [0, 1], Weird(), hs.Constant(), 10, 0)


def test_fkg_exact_indicator(two_path):
    assert hs.fkg_exact_indicator(two_path, [0, 1], 0, 5000, 2).passed


def test_fkg_constant_is_uncorrelated(two_path):
    r = hs.fkg_test(two_path, [0, 1], hs.Indicator([0]), hs.Constant(), 500, 2)
    assert r.estimate == 0.0 and r.passed


def test_catalog_monotone_under_added_trajectory():
    # adding a trajectory can only raise every catalog functional
    pos = {0: 0, 1: 1}
    ind = np.array([[1, 0], [1, 1]])
    tc = np.array([[1, 0], [2, 1]])
    vc = np.array([[3, 0], [4, 1]])
    for f in hs.catalog([0, 1]):
        v = f.values(pos, ind, tc, vc)
        assert v[0] <= v[1]


def test_corpus_nesting():
    for c in hs.corpus():
        assert c["x"] in c["K"] and set(c["K"]) <= set(c["L"])
    assert len(hs.sampling_corpus()) == 4


def test_atom_crossing_small():
    assert hs.atom_crossing_test(4, 5000, 3).passed


def test_levels_and_bridge_small():
    g, _ = make_biased_z(3)
    mono, reps = hs.levels_test(g, [g.index(0)], (0.5, 1.0, 2.0), 2000, 1)
    assert mono and all(r.passed for r in reps)
    assert all(r.passed for r in hs.bridge_test(g, [g.index(i) for i in (-1, 0, 1)], g.index(0), 3000, 1))
