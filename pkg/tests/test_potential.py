import math

import numpy as np
import pytest
from hypothesis import given

from interlacements import (build_graph, capacity, consistency_pushforward, equilibrium,
                            flow_energy, harmonic_flow, hinge, hitting, last_exit_distribution,
                            make_biased_z, make_regular_tree, restricted_equilibrium)
from interlacements import potential as pot

import oracles
from conftest import close, graph_with_sets, killed_graphs


# frozen values for the two-vertex path (unit edge, unit kill at both ends)

def test_two_path_green(two_path):
    assert close(pot.greens(two_path), [[4 / 3, 2 / 3], [2 / 3, 4 / 3]])


def test_two_path_escape_and_capacity(two_path):
    assert close(pot.escape_probability(two_path, [0]), [0.75])
    assert close(pot.escape_probability(two_path, [0, 1]), [0.5, 0.5])
    assert capacity(two_path, [0]) == pytest.approx(1.5, abs=1e-14)
    assert capacity(two_path, [0, 1]) == pytest.approx(2.0, abs=1e-14)


def test_two_path_hinge(two_path):
    H = hinge(two_path, [0, 1])
    assert close(H.h, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]])
    assert H.couples()[(0, 1)] == pytest.approx(1 / 6, abs=1e-14)


def test_single_vertex(single):
    assert capacity(single, [0]) == 1.0
    assert close(pot.greens(single), [[1.0]])


def test_biased_z_origin():
    g, _ = make_biased_z(5)
    o = g.index(0)
    assert close(pot.escape_probability(g, [o]), [0.5])
    assert capacity(g, [o]) == pytest.approx(1.0, abs=1e-12)
    prob, _ = hitting(g, [o])
    for n in range(-5, 6):
        assert prob[g.index(n)] == pytest.approx(2.0 ** -abs(n), abs=1e-12)


def test_biased_z_end_probabilities():
    g, _ = make_biased_z(4)
    right = pot.end_probability(g, "+")
    assert right[g.index(0)] == pytest.approx(0.5, abs=1e-12)
    assert right[g.index(1)] == pytest.approx(1 - 0.25, abs=1e-12)


@pytest.mark.parametrize("R", [4, 6, 8])
def test_restricted_capacity_quarter(R):
    g, _ = make_biased_z(R)
    _, lr = restricted_equilibrium(g, [g.index(0)], "-", "+")
    _, rr = restricted_equilibrium(g, [g.index(0)], "+", "+")
    assert lr == pytest.approx(0.25, abs=1e-12)
    assert rr == pytest.approx(0.25, abs=1e-12)
    # ends partition the escape: restricted capacities over all end pairs add up to cap
    total = sum(restricted_equilibrium(g, [g.index(0)], A, B)[1] for A in "-+" for B in "-+")
    assert total == pytest.approx(capacity(g, [g.index(0)]), abs=1e-12)


def test_tree_root_capacity():
    t = make_regular_tree(2, 6)
    assert capacity(t, [0]) == pytest.approx(1.0, abs=1e-12)


def test_last_exit_distribution_two_path(two_path):
    d = last_exit_distribution(two_path, [0, 1], 0)
    assert d.kind == "measure"
    assert close([d[0], d[1]], [2 / 3, 1 / 3])
    assert last_exit_distribution(two_path, [0, 1], 0, normalize=True).total == pytest.approx(1.0)


def test_flow_energy_two_path(two_path):
    # unit flow from {0} straight to the ghost
    assert flow_energy(two_path, [0], {(0, pot.GHOST): 1.0}) == pytest.approx(2.0)
    assert flow_energy(two_path, [0], harmonic_flow(two_path, [0])) == pytest.approx(2 / 1.5)
    with pytest.raises(pot.FlowError):
        flow_energy(two_path, [0], {(0, pot.GHOST): 0.5})
    with pytest.raises(pot.FlowError):
        flow_energy(two_path, [0], {(0, 1): 1.0})


# oracle and property tests


@given(graph_with_sets())
def test_equilibrium_matches_sweeping_oracle(data):
    g, K, _ = data
    e, _, _ = oracles.equilibrium(g, K)
    prof = equilibrium(g, K)
    assert close([prof.e[k] for k in K], [float(e[k]) for k in K], 1e-10)
    assert close(hitting(g, K)[0], [float(v) for v in oracles.hitting_probability(g, K)], 1e-10)


@given(killed_graphs())
def test_green_matches_oracle_and_is_reversible(g):
    G, a = oracles.green(g)
    ours = pot.greens(g)
    assert close(ours, [[float(v) for v in row] for row in G], 1e-10)
    A = g.total_weight[:, None] * ours
    assert close(A, A.T, 1e-10)


@given(graph_with_sets())
def test_hinge_symmetric_with_equilibrium_marginals(data):
    g, K, _ = data
    H = hinge(g, K)
    assert H.asymmetry() <= 1e-10 * max(1.0, H.cap)
    assert close(H.h.sum(axis=1), H.e, 1e-10)
    assert H.h.sum() == pytest.approx(H.cap, abs=1e-10)


@given(graph_with_sets())
def test_consistency_pushforward(data):
    g, K, L = data
    assert close(consistency_pushforward(g, K, L), equilibrium(g, K).e, 1e-10)


@given(graph_with_sets())
def test_capacity_monotone_and_subadditive(data):
    g, K, L = data
    assert capacity(g, K) <= capacity(g, L) + 1e-12
    rest = sorted(set(L) - set(K))
    if rest:
        assert capacity(g, L) <= capacity(g, K) + capacity(g, rest) + 1e-12


@given(graph_with_sets())
def test_harmonic_flow_energy_is_two_over_capacity(data):
    g, K, _ = data
    cap = capacity(g, K)
    if cap <= 0:
        return
    flow = harmonic_flow(g, K)
    assert flow_energy(g, K, flow) == pytest.approx(2.0 / cap, rel=1e-9)


@given(graph_with_sets())
def test_last_exit_law_sums_to_hitting(data):
    g, K, _ = data
    le = pot.last_exit_matrix(g, K)
    assert close(le.sum(axis=1), hitting(g, K)[0], 1e-10)


def test_conditional_hit_is_probability():
    g, _ = make_biased_z(3)
    L = [g.index(i) for i in range(-2, 3)]
    x = g.index(0)
    for xs in L:
        for y in L:
            if pot.last_exit_matrix(g, L)[xs, L.index(y)] > 0:
                c = pot.conditional_hit_given_last_exit(g, L, x, xs, y)
                assert -1e-12 <= c <= 1 + 1e-12
    # a crossing path from +2 ending its last visit at -2 must pass the origin
    assert pot.conditional_hit_given_last_exit(g, L, x, g.index(2), g.index(-2)) == pytest.approx(1.0)
