import pytest
from hypothesis import given

from interlacements import atom_flow, cap_identity, make_biased_z, make_exhaustion, strong_criterion, weak_criterion
from interlacements import criteria as cr

from conftest import graph_with_sets


@pytest.mark.parametrize("values,verdict", [
    ([0.5, 0.1, 0.005], "vanishing-trend"),
    ([0.0, 0.0, 0.0], "vanishing-trend"),
    ([0.5, 0.5, 0.5], "bounded-below"),
    ([0.40, 0.42, 0.41], "bounded-below"),
    ([0.5, 0.2, 0.3], "inconclusive"),
    ([0.001, 0.002, 0.003], "inconclusive"),
    ([0.1, 0.05], "inconclusive"),
])
def test_trend_verdict(values, verdict):
    assert cr.trend_verdict(values) == verdict


@pytest.fixture(scope="module")
def biased():
    return make_exhaustion("biased_z", range(2, 9))


@pytest.fixture(scope="module")
def tree():
    return make_exhaustion("tree", range(2, 7))


def test_biased_strong_sits_on_crossing_floor(biased):
    tr = strong_criterion(biased, 0, 0.3)
    assert tr.verdict == "bounded-below"
    assert all(v == pytest.approx(cr.crossing_floor(0.3), abs=1e-10) for v in tr.values)
    assert max(r.aux_residual for r in tr.records) <= 1e-10


def test_tree_strong_stays_positive(tree):
    # the two root subtrees are swapped only through the root: crossing hinge mass 1/2,
    # conditional hit 1, so the criterion keeps a floor of 0.5 * (1 - eps) plus a constant
    assert strong_criterion(tree, (), 0.1).values == pytest.approx([0.625] * 5, abs=1e-10)
    tr = strong_criterion(tree, (), 0.3)
    assert tr.values == pytest.approx([0.375] * 5, abs=1e-10)
    assert tr.verdict == "bounded-below"


def test_lattice_strong_vanishes_at_larger_eps():
    ex = make_exhaustion("lattice", [1, 2, 3, 4])
    tr = strong_criterion(ex, (0, 0, 0), 0.3)
    assert tr.verdict == "vanishing-trend"


@pytest.mark.parametrize("fam", ["biased", "tree"])
@pytest.mark.parametrize("eps", [0.1, 0.3])
def test_weak_criterion_vanishes(fam, eps, request):
    ex = request.getfixturevalue(fam)
    site = 0 if fam == "biased" else ()
    assert weak_criterion(ex, site, eps).verdict == "vanishing-trend"


def test_weak_criterion_raises_when_not_vanishing(biased, monkeypatch):
    monkeypatch.setitem(cr.CRITERIA_CONFIG, "vanish_threshold", -1.0)
    with pytest.raises(cr.CriterionError):
        weak_criterion(biased, 0, 0.1)


def test_eps_must_be_positive(biased):
    with pytest.raises(ValueError):
        strong_criterion(biased, 0, 0.0)


def test_cap_identity(biased, tree):
    assert max(cap_identity(biased, 0)) <= 1e-10
    assert max(cap_identity(tree, ())) <= 1e-10


def test_atom_flow_verdicts(biased):
    lr = atom_flow(biased, "-", "+")
    assert lr.verdict == "finite-limit"
    assert lr.values == pytest.approx([0.25] * len(lr.values), abs=1e-12)
    assert atom_flow(biased, "+", "+").verdict == "diverging"
    with pytest.raises(Exception):
        atom_flow(make_exhaustion("tree", [1, 2, 3]), "-", "+")


def test_hinge_identity_biased():
    g, _ = make_biased_z(3)
    L = [g.index(i) for i in range(-2, 3)]
    assert cr.hinge_identity_check(g, L, g.index(0)) <= 1e-10


@given(graph_with_sets())
def test_hinge_identity_random(data):
    g, K, L = data
    assert cr.hinge_identity_check(g, L, K[0]) <= 1e-10


def test_trace_serialization(biased):
    tr = strong_criterion(biased, 0, 0.3)
    csv = tr.to_csv().splitlines()
    assert csv[0] == "level,eps,value,cap,aux_residual" and len(csv) == 8
    assert "verdict = bounded-below" in tr.report()
