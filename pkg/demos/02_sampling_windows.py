"""Sampling the interlacement set seen through a finite window.

Run: python3 demos/02_sampling_windows.py
"""
import math

from interlacements import RngStream, capacity, extend_window, make_regular_tree, restrict_window, sample_levels, sample_window
from interlacements import sampler as smp

tree = make_regular_tree(2, 4)
root = [0]
depth2 = [i for i, lab in enumerate(tree.labels) if len(lab) <= 2]
rng = RngStream(seed=2024, stream=0)

w = sample_window(tree, depth2, rng)
print(f"one draw on a window of {len(depth2)} vertices: {len(w)} trajectories")
for t in w.trajectories[:3]:
    print(f"  entry {tree.label(t.entry)}: {len(t.backward) - 1} steps before, {len(t.forward) - 1} after")

# Vacancy: no trajectory touches K with probability exp(-cap K).
n = 20000
empty = sum(sample_window(tree, root, rng).empty for _ in range(n)) / n
print(f"P(root vacant) ~ {empty:.4f}  vs exp(-cap) = {math.exp(-capacity(tree, root)):.4f}")

# Restricting a big window to a small one and growing it back are both exact.
big = sample_window(tree, depth2, rng)
small = restrict_window(tree, big, root)
grown = extend_window(tree, root, depth2, small, rng)
print("restricted:", len(small), "trajectories; re-extended:", len(grown))

# Levels are coupled by marks: the set at level 0.5 sits inside the set at 2.
draw = sample_levels(tree, depth2, (0.5, 1.0, 2.0), rng)
print("occupied vertices by level:", {u: int(s.indicator.sum()) for u, s in draw.items()})
print(smp.dumps_trajectories(draw[0.5]) or "(level 0.5 empty)")
