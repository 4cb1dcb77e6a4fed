"""Exact potential theory on small killed graphs.

Run: python3 demos/01_potential_theory.py
"""
import numpy as np

from interlacements import build_graph, capacity, equilibrium, hinge, make_biased_z
from interlacements import potential as pot

# Two vertices joined by a unit edge, each killed at rate one.
path = build_graph([(0, 1, 1.0)], {0: 1.0, 1: 1.0}, name="two_path")
print("Green function (expected visits):")
print(pot.greens(path))
print("escape probability from {0}:", pot.escape_probability(path, [0]))
print("capacity of {0}:", capacity(path, [0]), " of {0,1}:", capacity(path, [0, 1]))

# The hinge measure pairs first and last visits; it is symmetric.
H = hinge(path, [0, 1])
print("hinge measure:\n", H.h, "\nasymmetry:", H.asymmetry())

# On the biased line the walk drifts outward; the exterior is folded exactly
# into a kill plus a self-loop at each end, so finite radius loses nothing.
for R in (3, 6, 9):
    g, _ = make_biased_z(R)
    o = g.index(0)
    prob, _ = pot.hitting(g, [o])
    print(f"radius {R}: cap(origin) = {capacity(g, [o]):.15f}, "
          f"P_3[hit origin] = {prob[g.index(3)]:.15f} (2^-3 = {2**-3})")

# Trajectories through the origin split by which end they come from and go to.
g, _ = make_biased_z(6)
for A in "-+":
    for B in "-+":
        print(f"restricted capacity {A} -> {B}:",
              round(pot.restricted_equilibrium(g, [g.index(0)], A, B)[1], 12))

# The harmonic current flow has energy 2 / cap.
K = [g.index(i) for i in (-1, 0, 1)]
print("flow energy * cap / 2 =", pot.flow_energy(g, K, pot.harmonic_flow(g, K)) * capacity(g, K) / 2)
print("equilibrium measure on K:", np.round(equilibrium(g, K).e[K], 6))
