"""Criterion traces along growing windows on three graph families.

The weak sum always dies out. The hinge-weighted (strong) sum stays at
0.5 * (1 - eps) on the biased line because half the hinge mass crosses the
origin. On the binary tree it also stays positive (0.375 at eps = 0.3): the
hinge couples joining the two subtrees of the root must pass through the root.
On the cubic lattice it vanishes.

Run: python3 demos/03_criteria_dichotomy.py
"""
from interlacements import atom_flow, make_exhaustion, strong_criterion, weak_criterion
from interlacements.criteria import crossing_floor

families = {
    "biased_z": (make_exhaustion("biased_z", range(2, 9)), 0),
    "tree": (make_exhaustion("tree", range(2, 7)), ()),
    "lattice": (make_exhaustion("lattice", [1, 2, 3, 4]), (0, 0, 0)),
}
for name, (ex, x) in families.items():
    for eps in (0.1, 0.3):
        s = strong_criterion(ex, x, eps)
        w = weak_criterion(ex, x, eps)
        print(f"{name:9s} eps={eps}: strong {s.verdict:16s} {[round(v, 4) for v in s.values]}")
        print(f"{'':9s}          weak   {w.verdict:16s} {[round(v, 4) for v in w.values]}")
print("closed-form floor on the biased line at eps=0.3:", crossing_floor(0.3))

ex = families["biased_z"][0]
for A, B in (("-", "+"), ("+", "+")):
    tr = atom_flow(ex, A, B)
    print(f"flow {A}->{B}: {tr.verdict}, values {[round(v, 4) for v in tr.values]}")
